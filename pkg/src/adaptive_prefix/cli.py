"""Command line: ``apc encode|decode|bench|sort``.

Exit status: 0 success, 1 usage error, 2 data or I/O error, 3 a bound was
violated during ``bench``.
"""

import argparse
import os
import random
import sys
import time
import warnings

from . import analysis
from .codec import Decoder, Encoder
from .container import choose_alphabet, decode_all, encode_chunks
from .errors import CodecError, ConfigurationError, GuaranteeWarning
from .freq_model import AlphabetMap, LengthPolicy
from .online_sorter import OnlineSorter

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BOUND = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_input(path):
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def write_output(path, data):
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    with open(path, "wb") as fh:
        fh.write(data)


def parse_size(text):
    text = text.strip()
    if "^" in text:
        base, exp = text.split("^")
        return int(base) ** int(exp)
    return int(float(text))


def parse_list(text):
    return [parse_size(t) for t in text.split(",") if t.strip()]


def policy_from_args(args):
    if args.mode == "shannon":
        if args.max_len is not None:
            raise UsageError("--max-len only applies to --mode ll")
        return LengthPolicy.shannon()
    if args.max_len is None:
        raise UsageError("--mode ll needs --max-len F")
    return LengthPolicy.length_limited(args.max_len)


def report_stats(stats, stream=None):
    stream = stream or sys.stderr
    m = sum(s.m for s in stats)
    bits = sum(s.bits_emitted for s in stats)
    print(f"containers={len(stats)}", file=stream)
    print(f"m={m}", file=stream)
    print(f"bits_emitted={bits}", file=stream)
    print(f"bits_per_symbol={bits / max(m, 1):.6f}", file=stream)
    print(f"max_steps_per_symbol={max(s.max_steps_per_symbol for s in stats)}", file=stream)
    print(f"budget={max(s.budget for s in stats)}", file=stream)
    print(f"phase_count={sum(s.phase_count for s in stats)}", file=stream)
    print(f"kraft_slack={min(s.kraft_slack for s in stats)}", file=stream)


def cmd_encode(args):
    policy = policy_from_args(args)
    data = read_input(args.input)
    if not data:
        raise UsageError("input is empty; the codec needs m >= 1 symbols")
    blob, stats = encode_chunks(data, args.chunk, policy=policy, alphabet=args.alphabet)
    write_output(args.output, blob)
    report_stats(stats)
    return EXIT_OK


def cmd_decode(args):
    data = read_input(args.input)
    out, stats = decode_all(data, warn=False)
    write_output(args.output, out)
    report_stats(stats)
    return EXIT_OK


def cmd_sort(args):
    data = read_input(args.input)
    if not data:
        write_output(args.output, b"")
        return EXIT_OK
    _, symbols = choose_alphabet(data, "auto")
    sorter = OnlineSorter(symbols).trace()
    alpha = sorter.alphabet
    ids = [alpha.id(b) for b in data]
    for a in ids:
        sorter.push_id(a)
    perm = sorter.finish()
    write_output(args.output, "".join(f"{i}\n" for i in perm).encode())
    report = analysis.verify_sort(ids, alpha.n, sorter.per_push)
    for line in report.lines():
        print(line, file=sys.stderr)
    print(f"H_plus_2={report.H + 2:.6f}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_BOUND


SOURCES = ("uniform", "geometric", "round-robin")


def synthetic(source, m, n, rng):
    if source == "uniform":
        return [rng.randrange(n) for _ in range(m)]
    if source == "geometric":
        return [min(int(rng.expovariate(0.5)), n - 1) for _ in range(m)]
    return analysis.round_robin(n, m)


def bench_one(name, ids, n, policy, out):
    """Encode, decode and verify one corpus. Returns (ok, stats)."""
    t0 = time.perf_counter()
    enc = Encoder(len(ids), range(n), policy, trace=True, warn=False)
    for a in ids:
        enc.encode_id(a)
    payload = enc.finish()
    t1 = time.perf_counter()
    dec = Decoder(len(ids), range(n), payload, policy, warn=False)
    back = [dec.decode_id() for _ in range(len(ids))]
    dec.finish()
    t2 = time.perf_counter()
    report = analysis.verify_run(ids, n, policy, enc.stats.lengths)
    roundtrip = back == list(ids)
    ok = report.ok and roundtrip and enc.stats.max_steps_per_symbol <= enc.stats.budget
    out.write(analysis.format_report(name, report))
    out.write(f"H_plus_1={report.H + 1:.6f}\n")
    out.write(f"roundtrip={int(roundtrip)}\n")
    out.write(f"max_steps_per_symbol={enc.stats.max_steps_per_symbol}\n")
    out.write(f"budget={enc.stats.budget}\n")
    out.write(f"encode_seconds={t1 - t0:.3f}\ndecode_seconds={t2 - t1:.3f}\n")
    return ok, enc.stats


def cmd_bench(args):
    policy = policy_from_args(args)
    sizes = parse_list(args.sizes)
    alphabets = parse_list(args.alphabets)
    rng = random.Random(args.seed)
    out = open(args.report, "w") if args.report != "-" else sys.stdout
    failures = 0
    try:
        budgets = set()
        for n in alphabets:
            for m in sizes:
                for source in SOURCES:
                    ok, stats = bench_one(f"{source} m={m} n={n}",
                                          synthetic(source, m, n, rng), n, policy, out)
                    failures += not ok
                    budgets.add(stats.budget)
        if args.corpus:
            for entry in sorted(os.listdir(args.corpus)):
                path = os.path.join(args.corpus, entry)
                if not os.path.isfile(path):
                    continue
                data = read_input(path)
                if not data:
                    continue
                _, symbols = choose_alphabet(data, "auto")
                alpha = AlphabetMap(symbols)
                ok, stats = bench_one(f"file {entry}", [alpha.id(b) for b in data],
                                      alpha.n, policy, out)
                failures += not ok
        out.write(f"[work]\nbudgets={sorted(budgets)}\nconstant_budget={int(len(budgets) <= 1)}\n")
        if args.theorem2:
            report = analysis.theorem2_experiment(args.theorem2)
            out.write(analysis.format_report(f"theorem2 ell={args.theorem2}", report))
            out.write(f"gap_over_m={report.gap_vs_static_huffman / report.m:.6f}\n")
            failures += report.gap_vs_static_huffman <= 0
        out.write(f"[summary]\nfailures={failures}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK if failures == 0 else EXIT_BOUND


def build_parser():
    p = Parser(prog="apc", description="Adaptive prefix coding with constant work per symbol.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    def add_mode(sp):
        sp.add_argument("--mode", choices=("shannon", "ll"), default="shannon",
                        help="plain adaptive Shannon code or length-limited code")
        sp.add_argument("--max-len", type=int, default=None, metavar="F",
                        help="codeword length cap for --mode ll; every codeword is shorter than F")

    e = sub.add_parser("encode", help="compress a file into one or more containers")
    e.add_argument("input")
    e.add_argument("output")
    add_mode(e)
    e.add_argument("--alphabet", choices=("auto", "bytes"), default="auto",
                   help="auto: the distinct bytes of the input; bytes: all 256 values")
    e.add_argument("--chunk", type=parse_size, default=None,
                   help="split input into independent containers of this many bytes")
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="restore the original bytes")
    d.add_argument("input")
    d.add_argument("output")
    d.set_defaults(func=cmd_decode)

    b = sub.add_parser("bench", help="measure and verify bounds on synthetic and file corpora")
    b.add_argument("corpus", nargs="?", default=None, help="directory of extra input files")
    b.add_argument("--sizes", default="2^10,2^14,2^16")
    b.add_argument("--alphabets", default="2,16,256")
    b.add_argument("--report", default="-", help="where to write the key=value report")
    b.add_argument("--theorem2", type=int, default=8, metavar="ELL",
                   help="run the round-robin gap experiment with 2^ELL+1 symbols (0 to skip)")
    b.add_argument("--seed", type=int, default=1)
    add_mode(b)
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("sort", help="stable permutation of the input bytes, one index per line")
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_sort)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GuaranteeWarning)
            return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"apc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CodecError, OSError) as exc:
        print(f"apc: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
