"""Command line entry point.

Exit status: 0 on success, 1 when a verification fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import documents as docs
from .exceptions import PhotonPovmError
from .runtime import MODES, ExperimentConfig, run_shots, teleport_trials, verify
from .synthesis import bell_preset, synth_instrument, synth_povm

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _emit(doc: dict, out: str | None) -> None:
    if out:
        docs.write_doc(out, doc)
    else:
        sys.stdout.write(docs.dumps(doc))


def cmd_synth(args) -> int:
    spec, kraus = docs.povm_from_doc(docs.read_doc(args.inp))
    tree = synth_instrument(kraus, spec.labels) if kraus is not None else synth_povm(spec)
    docs.write_doc(args.out, docs.tree_to_doc(tree))
    rep = verify(tree, spec)
    print("wrote %s: %d outcomes, %d stages, max deviation %.3g"
          % (args.out, len(tree.labels), len(tree.nodes()), rep.max_deviation))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_simulate(args) -> int:
    tree = docs.tree_from_doc(docs.read_doc(args.settings))
    state, rho = docs.state_from_doc(docs.read_doc(args.state))
    if state is not None:
        rho = None
    cfg = ExperimentConfig(args.shots, args.seed, args.mode, tree=tree, state=state, density=rho)
    _emit(run_shots(cfg).to_doc(), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    rep = verify(docs.read_doc(args.settings), docs.read_doc(args.povm))
    sys.stdout.write(docs.dumps(rep.to_doc()))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_example(args) -> int:
    tree, spec = bell_preset()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    docs.write_doc(out / "bell_settings.json", docs.tree_to_doc(tree))
    docs.write_doc(out / "bell_povm.json", docs.povm_to_doc(spec))
    print(out / "bell_settings.json")
    print(out / "bell_povm.json")
    return EXIT_OK


def cmd_teleport(args) -> int:
    state, _ = docs.state_from_doc(docs.read_doc(args.state))
    if state is None:
        raise docs.DocumentError("teleportation needs a pure state ('amplitudes')")
    sys.stdout.write(docs.dumps(teleport_trials(state, args.trials, args.seed).to_doc()))
    return EXIT_OK


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _seed(text: str) -> int:
    n = int(text, 0)
    if not 0 <= n < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="photonpovm", description="Synthesize and simulate linear-optics POVMs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="compile a POVM document into settings")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("simulate", help="sample shots through a settings tree")
    s.add_argument("--settings", required=True)
    s.add_argument("--state", required=True)
    s.add_argument("--shots", type=_positive, required=True)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--mode", choices=MODES, default="direct")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", help="compare settings against a POVM document")
    s.add_argument("--settings", required=True)
    s.add_argument("--povm", required=True)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("example", help="write preset documents")
    s.add_argument("name", choices=("bell",))
    s.add_argument("--out-dir", default=".")
    s.set_defaults(func=cmd_example)

    s = sub.add_parser("teleport-demo", help="heralded teleportation statistics")
    s.add_argument("--state", required=True)
    s.add_argument("--trials", type=_positive, default=100000)
    s.add_argument("--seed", type=_seed, default=0)
    s.set_defaults(func=cmd_teleport)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PhotonPovmError, json.JSONDecodeError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
