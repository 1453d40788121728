#!/usr/bin/env python3
"""
Command-line interface for the IL-(P) workbench.

Exit codes: 0 theorem or success, 1 non-theorem or failed check, 2 budget
exceeded, 64 usage, parse or configuration error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .calculus import Sequent, System, check, parse_sequent
from .canonical import FAMILIES, STAGES, countermodel
from .config import Config
from .cutelim import CutEliminator, reduction_table
from .embedding import chi, transfer
from .errors import BudgetExceeded, ConfigError, IlpError, ParseError, PreconditionError
from .fixedpoint import fixpoint
from .interpolation import interpolate
from .report import (VerdictCertificate, pdf_available, summary_certificate, summary_frame,
                     write_csv)
from .search import NotProvable, Prover, decide, formula_goal
from .selftest import SUITES, run_selftest
from .semantics import SimplifiedModel, evaluate, extension
from .serialization import (derivation_to_dict, dump_derivation, dump_model, load_derivation,
                            load_designated_world, load_model)
from .syntax import parse, to_text

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_BUDGET = 2
EXIT_USAGE = 64

PDF_MISSING = "PDF output not available (reportlab not installed)"


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 64 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"Error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _names(text: str):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _system(text: str) -> System:
    lowered = text.lower()
    for system in System:
        if system.value.lower() == lowered:
            return system
    raise argparse.ArgumentTypeError(f"unknown system {text!r} (ILmPs or ILms)")


def _emit(args, data: Dict[str, Any], lines: List[str]) -> None:
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _output(args, config: Config, default: str) -> Path:
    if args.output:
        return Path(args.output)
    return Path(config.output_dir) / default


def _goal(text: str) -> Sequent:
    """A sequent when text contains '=>', otherwise the goal => text."""
    if "=>" in text:
        return parse_sequent(text)
    return formula_goal(parse(text))


# ---------------------------------------------------------------- commands

def cmd_decide(args, config: Config) -> int:
    f = parse(args.formula)
    verdict = decide(f, args.system, config.budget)
    data = {"formula": to_text(f), "system": args.system.value,
            "verdict": "theorem" if verdict else "non-theorem", "explored": verdict.explored}
    lines = [data["verdict"]]
    detail = f"{verdict.explored} sequents explored"
    if verdict:
        detail = f"proof of height {verdict.derivation.height}, {verdict.derivation.size} nodes"
    elif args.system is System.ILMPS and not args.no_countermodel:
        try:
            result = countermodel(f, "simplified", "generated", config.budget,
                                  config.family_budget, config.model_budget, config.build_budget)
        except BudgetExceeded as e:
            lines.append(f"Warning: countermodel not built ({e})")
        else:
            path = dump_model(result.model, _output(args, config, "countermodel.json"),
                              result.world)
            data["countermodel"] = str(path)
            detail = f"countermodel with {len(result.model.worlds)} worlds"
            lines.append(f"countermodel: {path}")
    else:
        data["leaf"] = str(verdict.leaf)
        lines.append(f"failed at: {verdict.leaf}")
    if args.pdf:
        if not pdf_available():
            lines.append(PDF_MISSING)
        else:
            certificate = VerdictCertificate(to_text(f), data["verdict"], args.system.value,
                                             detail)
            lines.append(f"certificate: {certificate.render(args.pdf)}")
    _emit(args, data, lines)
    return EXIT_OK if verdict else EXIT_NEGATIVE


def cmd_prove(args, config: Config) -> int:
    goal = _goal(args.goal)
    verdict = Prover(args.system, config.budget).prove(goal)
    if not verdict:
        _emit(args, {"goal": str(goal), "provable": False, "leaf": str(verdict.leaf)},
              [f"not provable; failed at: {verdict.leaf}"])
        return EXIT_NEGATIVE
    derivation = verdict.derivation
    path = dump_derivation(derivation, _output(args, config, "proof.json"))
    _emit(args, {"goal": str(goal), "provable": True, "proof": str(path),
                 "height": derivation.height, "size": derivation.size},
          [f"proof of {goal}: height {derivation.height}, {derivation.size} nodes",
           f"written to {path}"])
    return EXIT_OK


def cmd_interpolate(args, config: Config) -> int:
    a, b = parse(args.left), parse(args.right)
    result = interpolate(a, b, args.system, config.budget, confirm=args.confirm)
    if isinstance(result, NotProvable):
        _emit(args, {"provable": False, "leaf": str(result.leaf)},
              [f"{to_text(a)} -> {to_text(b)} is not a theorem"])
        return EXIT_NEGATIVE
    data = {"provable": True, "interpolant": to_text(result.formula)}
    lines = [to_text(result.formula)]
    if args.output:
        path = Path(args.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = dict(data, proof_left=derivation_to_dict(result.proof_left),
                       proof_right=derivation_to_dict(result.proof_right))
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        data["proofs"] = str(path)
        lines.append(f"proofs written to {path}")
    _emit(args, data, lines)
    return EXIT_OK


def cmd_fixpoint(args, config: Config) -> int:
    a = parse(args.formula)
    result = fixpoint(a, args.var, config.budget, verify=args.verify)
    data = {"formula": to_text(a), "variable": args.var, "fixpoint": to_text(result.fixpoint),
            "verified": result.verified if args.verify else None}
    lines = [to_text(result.fixpoint)]
    if args.verify:
        lines.append("verified: F <-> A(F) is a theorem")
    _emit(args, data, lines)
    return EXIT_OK


def cmd_countermodel(args, config: Config) -> int:
    f = parse(args.formula)
    result = countermodel(f, args.stage, args.family, config.budget, config.family_budget,
                          config.model_budget, config.build_budget)
    path = dump_model(result.model, _output(args, config, "countermodel.json"), result.world)
    _emit(args, {"formula": to_text(f), "stage": result.stage, "worlds": len(result.model.worlds),
                 "family": result.family_size, "adequate": result.adequate_size,
                 "model": str(path)},
          [f"{result.stage} countermodel with {len(result.model.worlds)} worlds "
           f"({result.family_size} maximal consistent sets, adequate set of "
           f"{result.adequate_size})", f"written to {path}"])
    return EXIT_OK


def cmd_translate(args, config: Config) -> int:
    f = parse(args.formula)
    translated = chi(f)
    data = {"formula": to_text(f), "translation": to_text(translated)}
    lines = [to_text(translated)]
    if args.transfer:
        model = load_model(args.transfer)
        if not isinstance(model, SimplifiedModel):
            raise PreconditionError(f"{args.transfer} holds a {model.kind} model, "
                                    f"not a simplified one")
        world = args.world or load_designated_world(args.transfer)
        if world is None:
            raise PreconditionError("no world given and none stored with the model")
        bimodal, world = transfer(model, world, f)
        path = dump_model(bimodal, _output(args, config, "bimodal.json"), world)
        data["model"] = str(path)
        lines.append(f"bimodal countermodel written to {path}")
    _emit(args, data, lines)
    return EXIT_OK


def cmd_check_model(args, config: Config) -> int:
    model = load_model(args.model)
    f = parse(args.formula)
    forced = extension(model, f, args.clause)
    data = {"formula": to_text(f), "kind": model.kind,
            "worlds": sorted(w for w in model.worlds if w in forced)}
    world = args.world or load_designated_world(args.model)
    if world is not None:
        holds = evaluate(model, world, f, args.clause)
        data.update(world=world, holds=holds)
        lines = [f"{to_text(f)} {'holds' if holds else 'fails'} at {world}"]
    else:
        holds = len(forced) == len(model.worlds)
        lines = [f"{to_text(f)} holds at {len(forced)} of {len(model.worlds)} worlds"]
    _emit(args, data, lines)
    return EXIT_OK if holds else EXIT_NEGATIVE


def cmd_cutelim(args, config: Config) -> int:
    derivation = load_derivation(args.proof)
    eliminator = CutEliminator()
    result = eliminator.eliminate(derivation)
    path = dump_derivation(result, _output(args, config, "cut_free.json"))
    table = reduction_table(eliminator.reductions)
    _emit(args, {"proof": str(path), "height": result.height, "size": result.size,
                 "reductions": dict(table), "checked": bool(check(result))},
          [f"cut-free proof of {result.endsequent}: height {derivation.height} -> "
           f"{result.height}", *(f"  {kind}: {count}" for kind, count in table),
           f"written to {path}"])
    return EXIT_OK


def cmd_selftest(args, config: Config) -> int:
    print(f"Running self-test with seed {config.seed}, formulas up to size {config.max_size} "
          f"over {', '.join(config.vars) or 'no variables'}")
    frame = run_selftest(config, args.suite)
    summary = summary_frame(frame)
    if args.csv:
        write_csv(frame, args.csv)
    failures = int(summary["fail"].sum())
    budget = int(summary["budget"].sum())
    lines = [summary.to_string(index=False)]
    if failures:
        failed = frame[frame["status"] == "fail"]
        lines += [f"FAIL {row.suite} / {row.item}: {row.detail}" for row in failed.itertuples()]
    if args.pdf:
        if pdf_available():
            path = summary_certificate(summary, config.seed).render(args.pdf)
            lines.append(f"certificate: {path}")
        else:
            lines.append(PDF_MISSING)
    _emit(args, {"seed": config.seed, "summary": summary.to_dict(orient="records"),
                 "failures": failures, "budget": budget}, lines)
    if failures:
        return EXIT_NEGATIVE
    return EXIT_BUDGET if budget else EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='More logging (-v info, -vv debug)')
    common.add_argument('--json', action='store_true', help='Machine-readable output')
    common.add_argument('--budget', type=int, help='Sequents explored by one proof search')
    common.add_argument('--closure-budget', dest='closure_budget', type=int,
                        help='Sequents in the oracle closure')
    common.add_argument('--family-budget', dest='family_budget', type=int,
                        help='Maximal consistent sets in a canonical model')
    common.add_argument('--model-budget', dest='model_budget', type=int,
                        help='Worlds in a built model')
    common.add_argument('--build-budget', dest='build_budget', type=int,
                        help='Sequents explored by the consistency checks of one canonical model')
    common.add_argument('--max-worlds', dest='max_worlds', type=int,
                        help='Largest frame enumerated')
    common.add_argument('--output-dir', dest='output_dir',
                        help='Directory for artifacts (default: output)')

    parser = _Parser(prog='ilp', description='Decision procedures, proofs and models for IL-(P)')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', metavar='command', parser_class=_Parser)
    commands.required = True

    def command(name, handler, help_text):
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.set_defaults(handler=handler)
        return sub

    def system_option(sub):
        sub.add_argument('--system', type=_system, default=System.ILMPS,
                         help='ILmPs (default) or ILms')

    sub = command('decide', cmd_decide, 'Decide whether a formula is a theorem')
    sub.add_argument('formula')
    system_option(sub)
    sub.add_argument('-o', '--output', help='Countermodel path (.json or .dot)')
    sub.add_argument('--no-countermodel', action='store_true',
                     help='Skip the countermodel for non-theorems')
    sub.add_argument('--pdf', help='Write a verdict certificate to this PDF')

    sub = command('prove', cmd_prove, 'Write a cut-free proof of a formula or sequent')
    sub.add_argument('goal', help="Formula, or sequent 'A, B => C'")
    system_option(sub)
    sub.add_argument('-o', '--output', help='Proof path (default: output/proof.json)')

    sub = command('interpolate', cmd_interpolate, 'Interpolant for a theorem A -> B')
    sub.add_argument('left')
    sub.add_argument('right')
    system_option(sub)
    sub.add_argument('--confirm', action='store_true',
                     help='Re-decide A -> C and C -> B independently')
    sub.add_argument('-o', '--output', help='Write the interpolant and both proofs here')

    sub = command('fixpoint', cmd_fixpoint, 'Explicit fixed point of a left-modalized variable')
    sub.add_argument('formula')
    sub.add_argument('--var', default='p', help='Fixed-point variable (default: p)')
    sub.add_argument('--verify', action='store_true', help='Decide F <-> A(F)')

    sub = command('countermodel', cmd_countermodel, 'Certified countermodel of a non-theorem')
    sub.add_argument('formula')
    sub.add_argument('--stage', choices=STAGES, default='simplified')
    sub.add_argument('--family', choices=FAMILIES, default='generated')
    sub.add_argument('-o', '--output', help='Model path (.json or .dot)')

    sub = command('translate', cmd_translate, 'Bimodal translation, optionally of a countermodel')
    sub.add_argument('formula')
    sub.add_argument('--transfer', help='Simplified countermodel (JSON) to transfer')
    sub.add_argument('--world', help='Refuting world (default: the one stored with the model)')
    sub.add_argument('-o', '--output', help='Bimodal model path (.json or .dot)')

    sub = command('check-model', cmd_check_model, 'Evaluate a formula on a stored model')
    sub.add_argument('model')
    sub.add_argument('formula')
    sub.add_argument('--world', help='World to evaluate at')
    sub.add_argument('--clause', choices=('a', 'b'), default='a',
                     help='Forcing clause for |> on simplified models')

    sub = command('cutelim', cmd_cutelim, 'Eliminate the cuts of a stored ILmPs proof')
    sub.add_argument('proof')
    sub.add_argument('-o', '--output', help='Cut-free proof path')

    sub = command('selftest', cmd_selftest, 'Run the acceptance corpus')
    sub.add_argument('--max-size', dest='max_size', type=int, help='Corpus formula size')
    sub.add_argument('--vars', type=_names, help="Corpus variables, e.g. 'p,q'")
    sub.add_argument('--seed', type=int, help='Seed for every generator')
    sub.add_argument('--jobs', type=int, help='Worker processes')
    sub.add_argument('--suite', action='append', choices=sorted(SUITES),
                     help='Run only this suite (repeatable)')
    sub.add_argument('--csv', help='Write every row to this CSV file')
    sub.add_argument('--pdf', help='Write a summary certificate to this PDF')
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')


def main(argv: Optional[List[str]] = None) -> None:
    """Main CLI function."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

    try:
        config = Config.from_namespace(args)
        code = args.handler(args, config)
    except (ParseError, ConfigError) as e:
        print(f"Error: {e}", file=sys.stderr)
        code = EXIT_USAGE
    except BudgetExceeded as e:
        print(f"Error: {e}", file=sys.stderr)
        code = EXIT_BUDGET
    except IlpError as e:
        print(f"Error: {e}", file=sys.stderr)
        code = EXIT_NEGATIVE
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        code = EXIT_NEGATIVE
    sys.exit(code)


if __name__ == "__main__":
    main()
