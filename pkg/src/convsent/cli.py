"""Command line entry point (``convsent``)."""

import argparse
import logging
import sys
from pathlib import Path

from . import audio, diarize, features, pipeline, sentiment, synth, transcribe
from .alignment import DistanceMetric
from .errors import BackendError, ConvsentError, InputFormatError, PipelineError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BACKEND = 3
EXIT_INTERNAL = 4

log = logging.getLogger("convsent")


def _metric(value: str) -> DistanceMetric:
    try:
        return DistanceMetric(value.lower())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"metric must be one of {', '.join(m.value for m in DistanceMetric)}"
        )


def _chunks_of(path):
    signal = audio.load_wav(path)
    return audio.extract_chunks(signal, audio.detect_voice_activity(signal))


def cmd_vad(args):
    signal = audio.load_wav(args.wav)
    for span in audio.detect_voice_activity(signal):
        sr = signal.sample_rate_hz
        print(f"{span.start_sample / sr:.3f}\t{span.end_sample / sr:.3f}")


def cmd_mfcc(args):
    signal = audio.load_wav(args.wav)
    whole = audio.Chunk(0, audio.ChunkSpan(0, len(signal)), signal.samples, signal.sample_rate_hz)
    mfcc = features.compute_mfcc(whole, features.MfccConfig(n_mfcc=args.n_mfcc))
    for row in mfcc.coeffs:
        print(",".join(f"{v:.6f}" for v in row))


def cmd_filterbank(args):
    cfg = features.MfccConfig(n_filters=args.n_filters, fft_size=args.fft_size)
    sys.stdout.write(features.build_mel_filterbank(cfg, args.sample_rate).to_csv())


def cmd_diarize(args):
    chunks = _chunks_of(args.wav)
    cfg = pipeline.PipelineConfig(backend=None, metric=args.metric, n_mfcc=args.n_mfcc)
    for chunk, speaker in zip(chunks, pipeline.label_chunks(chunks, cfg)):
        print(f"{chunk.id}\t{chunk.start_s:.3f}\t{chunk.end_s:.3f}\t{speaker}")


def cmd_sweep(args):
    chunks = _chunks_of(args.wav)
    ref = transcribe.read_oracle_file(args.reference)
    missing = [c.id for c in chunks if c.id not in ref]
    if missing:
        raise ConvsentError(f"reference file lacks speakers for chunks {missing}")
    points = diarize.feature_count_sweep(chunks, [ref[c.id] for c in chunks], args.metric)
    sys.stdout.write(diarize.sweep_to_csv(points))


def cmd_wrr(args):
    report = transcribe.compute_wrr(Path(args.ref).read_text(encoding="utf-8"),
                                    Path(args.hyp).read_text(encoding="utf-8"))
    for key, value in report.as_dict().items():
        print(f"{key}\t{value:.2f}" if isinstance(value, float) else f"{key}\t{value}")


def cmd_sentiment_score(args):
    lex = sentiment.read_lexicon(args.lexicon) if args.lexicon else sentiment.bundled_lexicon()
    score = sentiment.rule_polarity(args.text, lex)
    print(f"compound\t{score.compound:.4f}")
    print(f"label\t{score.label}")


def cmd_sentiment_eval(args):
    train = sentiment.read_corpus(args.train) if args.train else None
    test = sentiment.read_corpus(args.test)
    lex = sentiment.read_lexicon(args.lexicon) if args.lexicon else None
    method = sentiment.make_method(args.method, train=train, lexicon=lex)
    print(f"{sentiment.METHOD_TITLES[args.method]}\t{sentiment.evaluate_accuracy(method, test):.1f}")


def cmd_sentiment_compare(args):
    if args.corpus:
        corpora = {Path(p).stem: sentiment.read_corpus(p, Path(p).stem) for p in args.corpus}
    else:
        corpora = {name: sentiment.bundled_corpus(name) for name in sentiment.BUNDLED_CORPORA}
    lex = sentiment.read_lexicon(args.lexicon) if args.lexicon else None
    sys.stdout.write(sentiment.format_table(sentiment.compare_methods(corpora, lexicon=lex)))


def cmd_analyze(args):
    if args.backend_url:
        backend = transcribe.BackendConfig.http(args.backend_url, api_key_env_var=args.api_key_env)
    else:
        backend = transcribe.BackendConfig.oracle(args.transcripts)
    cfg = pipeline.PipelineConfig(
        backend=backend,
        metric=args.metric,
        n_mfcc=args.n_mfcc,
        sentiment_method=args.sentiment,
        lexicon_path=args.lexicon,
        train_corpus_path=args.train,
    )
    report = pipeline.run_pipeline(args.wav, cfg)
    if args.out:
        pipeline.save_report(report, args.out)
    else:
        sys.stdout.write(report.to_json())


def cmd_synth(args):
    conv = synth.demo_conversation(seed=args.seed)
    audio.save_wav(args.wav, conv.signal)
    if args.transcripts:
        Path(args.transcripts).write_text(conv.oracle_lines(), encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="convsent", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("vad", help="print voiced spans as start_s<TAB>end_s")
    s.add_argument("wav")
    s.set_defaults(func=cmd_vad)

    s = sub.add_parser("mfcc", help="MFCC matrix of the whole file as CSV")
    s.add_argument("wav")
    s.add_argument("--n-mfcc", type=int, default=13)
    s.set_defaults(func=cmd_mfcc)

    s = sub.add_parser("filterbank", help="dump the mel filterbank weights as CSV")
    s.add_argument("--sample-rate", type=int, default=16000)
    s.add_argument("--n-filters", type=int, default=26)
    s.add_argument("--fft-size", type=int, default=512)
    s.set_defaults(func=cmd_filterbank)

    s = sub.add_parser("diarize", help="label voiced chunks Speaker1/Speaker2")
    s.add_argument("wav")
    s.add_argument("--metric", type=_metric, default=DistanceMetric.EUCLIDEAN)
    s.add_argument("--n-mfcc", type=int, default=13)
    s.set_defaults(func=cmd_diarize)

    s = sub.add_parser("sweep", help="speaker accuracy versus number of MFCCs, as CSV")
    s.add_argument("wav")
    s.add_argument("--reference", required=True, help="chunk_id<TAB>speaker lines")
    s.add_argument("--metric", type=_metric, default=DistanceMetric.EUCLIDEAN)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("wrr", help="word recognition rate of a hypothesis against a reference")
    s.add_argument("ref")
    s.add_argument("hyp")
    s.set_defaults(func=cmd_wrr)

    s = sub.add_parser("sentiment", help="sentiment scoring and classifier evaluation")
    ssub = s.add_subparsers(dest="sentiment_command", required=True)
    t = ssub.add_parser("score", help="rule-engine compound score of one text")
    t.add_argument("text")
    t.add_argument("--lexicon")
    t.set_defaults(func=cmd_sentiment_score)
    t = ssub.add_parser("eval", help="accuracy of one method on a labelled corpus")
    t.add_argument("--method", choices=sentiment.METHODS, required=True)
    t.add_argument("--train")
    t.add_argument("--test", required=True)
    t.add_argument("--lexicon")
    t.set_defaults(func=cmd_sentiment_eval)
    t = ssub.add_parser("compare", help="method x corpus accuracy table")
    t.add_argument("corpus", nargs="*", help="label<TAB>text files (default: bundled corpora)")
    t.add_argument("--lexicon")
    t.set_defaults(func=cmd_sentiment_compare)

    s = sub.add_parser("analyze", help="full pipeline; writes the JSON conversation report")
    s.add_argument("wav")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--transcripts", help="oracle transcript file (chunk_id<TAB>text)")
    src.add_argument("--backend-url", help="HTTP transcription endpoint")
    s.add_argument("--api-key-env", help="environment variable holding the bearer token")
    s.add_argument("--metric", type=_metric, default=DistanceMetric.EUCLIDEAN)
    s.add_argument("--n-mfcc", type=int, default=13)
    s.add_argument("--sentiment", choices=sentiment.METHODS, default="vader")
    s.add_argument("--lexicon")
    s.add_argument("--train", help="training corpus for nb/svm (default: bundled corpora)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synth", help="write the bundled synthetic demo conversation")
    s.add_argument("wav")
    s.add_argument("--transcripts", help="also write its oracle transcript file here")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)
    return p


def exit_code_for(exc: BaseException) -> int:
    cause = exc.cause if isinstance(exc, PipelineError) else exc
    if isinstance(cause, (InputFormatError, FileNotFoundError)):
        return EXIT_INPUT
    if isinstance(cause, BackendError):
        return EXIT_BACKEND
    return EXIT_INTERNAL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ConvsentError, OSError, ValueError) as exc:
        print(f"convsent: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
