"""Speaker-aware sentiment analysis for recorded two-person conversations."""

from .alignment import DistanceMetric, DtwResult, dtw_distance, local_distance, windowed_dtw
from .audio import AudioSignal, Chunk, ChunkSpan, VadConfig, detect_voice_activity, extract_chunks, load_wav
from .diarize import Speaker, discriminate_speakers, evaluate_speaker_accuracy, pairwise_distance_matrix
from .features import MfccConfig, compute_mfcc
from .pipeline import PipelineConfig, load_report, run_pipeline, save_report
from .transcribe import BackendConfig, compute_wrr

__version__ = "0.1.0"
