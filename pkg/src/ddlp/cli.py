"""Command-line interface: ``ddlp <command> ...``.

Exit status is 0 on success, 1 on a usage error and 2 when the command
itself fails.
"""
import argparse
import logging
import sys
from pathlib import Path

from .bench import METHODS, gap_probe, run_benchmark, solve_full, evaluate_matrix, write_csv
from .datagen import GenConfig, gen_from_general, gen_maxflow, gen_mincostflow, gen_packing
from .errors import DdlpError
from .learn import SgaConfig, TrainingSet, final_projection, learn_colrand, learn_pca, learn_sga
from .mpsio import load_dataset, read_matrix, read_mps, save_dataset, write_matrix

log = logging.getLogger("ddlp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _methods(text):
    items = [v.strip() for v in text.split(",") if v.strip()]
    bad = [v for v in items if v not in METHODS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"methods must be drawn from {','.join(METHODS)}")
    return items


def _gen_config(args):
    return GenConfig(seed=args.seed, count=args.count, noise_level=args.noise,
                     outlier_fraction=getattr(args, "outlier_fraction", 0.0),
                     n_train=args.n_train,
                     per_entry=getattr(args, "noise_mode", "shared") == "per-entry")


def cmd_gen(args):
    cfg = _gen_config(args)
    if args.family == "packing":
        ds = gen_packing(args.m, args.n, cfg)
    elif args.family == "maxflow":
        ds = gen_maxflow(cfg, args.vertices, args.arcs)
    else:
        ds = gen_mincostflow(cfg, args.vertices, args.arcs)
    save_dataset(ds, args.out)
    log.info("wrote %d instances to %s", len(ds.instances), args.out)


def cmd_ingest(args):
    g = read_mps(args.file, minimize=not args.maximize)
    ds = gen_from_general(g, _gen_config(args), name=args.name or Path(args.file).stem)
    save_dataset(ds, args.out)
    log.info("wrote %d instances to %s", len(ds.instances), args.out)


def _training_set(ds):
    train = ds.train()
    full = solve_full(train)
    return TrainingSet(train, [full[i.id][0].x for i in train], ds.manifest.identical_a)


def cmd_train(args):
    ds = load_dataset(args.dataset)
    if args.method == "colrand":
        pm = learn_colrand(ds.manifest.n, args.k, args.seed)
    else:
        ts = _training_set(ds)
        if args.method == "pca":
            pm = learn_pca(ts, args.k)
        else:
            cfg = SgaConfig(learning_rate=args.lr, epochs=args.epochs, seed=args.seed,
                            init=args.init)
            pm = learn_sga(ts, args.k, cfg)
        if not args.no_final_projection:
            pm = final_projection(pm, ts)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(write_matrix(pm))


def cmd_eval(args):
    ds = load_dataset(args.dataset)
    pm = read_matrix(Path(args.matrix).read_bytes())
    test = ds.test()
    full = solve_full(test, workers=args.workers)
    records = evaluate_matrix(test, pm, full, ds.manifest.name, pm.method_tag,
                              workers=args.workers)
    write_csv(records, args.out)


def cmd_bench(args):
    kwargs = {}
    if args.seeds is not None:
        kwargs["seeds"] = args.seeds
    run_benchmark(args.dataset, methods=args.methods, ks=args.k_schedule, out_path=args.out,
                  final=not args.no_final_projection, workers=args.workers, **kwargs)


def cmd_gap(args):
    gap_probe(args.dataset, method=args.method, k=args.k, split_seeds=args.seeds,
              grid=args.grid, out_path=args.out)


def build_parser():
    p = _Parser(prog="ddlp", description="Learned projections for linear programs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def gen_options(sp, count=300):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--count", type=int, default=count, help="number of instances")
        sp.add_argument("--n-train", type=int, default=None,
                        help="training instances (default: two thirds)")
        sp.add_argument("--noise", type=float, default=0.1, help="perturbation level")
        sp.add_argument("--out", required=True, help="output dataset directory")

    sp = sub.add_parser("gen", help="generate a synthetic dataset")
    sp.add_argument("family", choices=("packing", "maxflow", "mincostflow"))
    gen_options(sp)
    sp.add_argument("--m", type=int, default=50, help="packing: structural rows")
    sp.add_argument("--n", type=int, default=500, help="packing: variables")
    sp.add_argument("--noise-mode", choices=("shared", "per-entry"), default="shared",
                    help="packing: one multiplier per instance or one per entry")
    sp.add_argument("--vertices", type=int, default=50, help="flow: vertices")
    sp.add_argument("--arcs", type=int, default=500, help="flow: arcs")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("ingest-mps", help="build a perturbed dataset from an MPS file")
    sp.add_argument("file")
    gen_options(sp)
    sp.add_argument("--outlier-fraction", type=float, default=0.02)
    sp.add_argument("--maximize", action="store_true", help="the MPS objective is maximized")
    sp.add_argument("--name", default=None, help="dataset name (default: file stem)")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("train", help="learn a projection matrix")
    sp.add_argument("method", choices=("pca", "sga", "colrand"))
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="output matrix JSON")
    sp.add_argument("--lr", type=float, default=0.01, help="SGA learning rate")
    sp.add_argument("--epochs", type=int, default=1, help="SGA epochs")
    sp.add_argument("--init", choices=("from_pca", "random_gaussian"), default="from_pca")
    sp.add_argument("--no-final-projection", action="store_true")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", help="evaluate a matrix on the test split")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--out", required=True, help="output CSV")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("bench", help="run the benchmark and write a CSV")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--methods", type=_methods, default=list(METHODS),
                    help="comma-separated subset of " + ",".join(METHODS))
    sp.add_argument("--out", required=True, help="output CSV")
    sp.add_argument("--k-schedule", type=_int_list, default=None,
                    help="comma-separated k values (default: n/100 steps up to n/10)")
    sp.add_argument("--seeds", type=_int_list, default=None, help="ColRand seeds")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--no-final-projection", action="store_true")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("gap", help="generalization-gap probe")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--method", choices=("pca", "sga", "colrand"), default="pca")
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--out", required=True, help="output CSV")
    sp.add_argument("--grid", type=_int_list, default=None, help="training sizes")
    sp.add_argument("--seeds", type=_int_list, default=[0, 1, 2, 3, 4], help="split seeds")
    sp.set_defaults(func=cmd_gap)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return 1
    except SystemExit as exc:          # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (DdlpError, OSError, ValueError) as exc:
        print(f"ddlp {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
