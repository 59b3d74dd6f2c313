"""Command line front end.

Every command prints exactly one JSON document on stdout.  Exit codes:

* 0   report produced (stable, corrigible, or a rational certificate)
* 1   domain error (JSON ``{"error": ...}`` on stdout)
* 2   certified not stabilizable
* 3   undetermined within the search bound
* 64  bad command line or unreadable input (plain message on stderr)
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import List, Optional, Tuple

from .errors import ToricStabError
from .fan import P2_FAN, Fan, parse_fan
from .lattice import set_max_bits
from .rotation import exact_rotation, numeric_orbit_angles, numeric_rotation
from .stability import (
    ToricModel,
    corrigibility_verdict,
    find_destabilizing_orbits,
    monomial_degrees,
    stabilize,
)
from .tropical import PLIntegralMap, compose, iterate, map_from_json

log = logging.getLogger("toricstab")

EX_OK, EX_DOMAIN, EX_NOT_STABILIZABLE, EX_UNDETERMINED, EX_USAGE = 0, 1, 2, 3, 64
COMMANDS = ("tropicalize", "rotation", "stability", "stabilize", "degrees", "compose", "verdict")
MAX_PERIOD_LIMIT = 1000
BOUND_LIMIT = 10_000
DEFAULT_MAX_BITS = 1_000_000


class UsageError(Exception):
    """Bad job description; reported on stderr with exit code 64."""


# ---------------------------------------------------------------------------
# job specification


@dataclass
class JobSpec:
    command: str
    maps: List[dict] = field(default_factory=list)
    fan: Optional[str] = None
    max_period: int = 24
    bound: int = 64
    iterations: int = 10_000
    seed: Tuple[int, int] = (1, 0)
    iterate: int = 1
    empirical: bool = False
    emit_rays_csv: Optional[str] = None
    write_fan: Optional[str] = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"command: unknown command {self.command!r}")
        if not self.maps:
            raise UsageError("map: one of --monomial or --map is required")
        if self.command != "compose" and len(self.maps) != 1:
            raise UsageError("map: exactly one map input is allowed for this command")
        if not 1 <= self.max_period <= MAX_PERIOD_LIMIT:
            raise UsageError(f"max_period: must be in 1..{MAX_PERIOD_LIMIT}, got {self.max_period}")
        if not 1 <= self.bound <= BOUND_LIMIT:
            raise UsageError(f"bound: must be in 1..{BOUND_LIMIT}, got {self.bound}")
        if self.iterations < 1:
            raise UsageError(f"iterations: must be positive, got {self.iterations}")
        if self.iterate < 1:
            raise UsageError(f"iterate: must be positive, got {self.iterate}")
        if tuple(self.seed) == (0, 0):
            raise UsageError("seed: the seed ray must be nonzero")

    @classmethod
    def from_dict(cls, d: dict) -> "JobSpec":
        d = dict(d)
        maps = []
        if "monomial" in d:
            maps.append({"monomial": d.pop("monomial")})
        if "map" in d:
            m = d.pop("map")
            maps.append(m if isinstance(m, dict) else {"ref": m})
        for m in d.pop("maps", []):
            maps.append(m if isinstance(m, dict) else {"ref": m})
        if "seed" in d:
            d["seed"] = tuple(d["seed"])
        known = set(cls.__dataclass_fields__) - {"maps"}
        unknown = set(d) - known
        if unknown:
            raise UsageError(f"job: unknown field(s) {', '.join(sorted(unknown))}")
        if "command" not in d:
            raise UsageError("command: missing")
        return cls(maps=maps, **d)


def _bundled(kind: str) -> Path:
    return Path(str(resources.files("toricstab").joinpath(kind)))


def _read_map_ref(ref: str) -> dict:
    p = Path(ref)
    if not p.exists():
        name = ref[:-5] if ref.endswith(".json") else ref
        p = _bundled("maps") / f"{name}.json"
        if not p.exists():
            raise UsageError(f"map: no such file or bundled map {ref!r}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"map: {p} is not valid JSON ({exc})") from exc


def resolve_map(entry: dict) -> PLIntegralMap:
    if "ref" in entry:
        entry = _read_map_ref(entry["ref"])
    if "monomial" in entry:
        rows = entry["monomial"]
        if len(rows) == 4:
            rows = [rows[:2], rows[2:]]
        entry = {"monomial": rows}
    try:
        return map_from_json(entry)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"map: {exc}") from exc


def resolve_fan(text: Optional[str]) -> Fan:
    if text is None:
        return P2_FAN
    p = Path(text)
    if p.is_file():
        text = p.read_text()
    try:
        return parse_fan(text)
    except ValueError as exc:
        if isinstance(exc, ToricStabError):
            raise
        raise UsageError(f"fan: cannot parse {text!r}") from exc


# ---------------------------------------------------------------------------
# dispatch


def _tropicalize(job, T):
    out = T.to_json()
    v = T.homeomorphism()
    out["homeomorphism"] = {"accepted": v.accepted, "orientation": v.orientation, "reason": v.reason}
    return out, EX_OK


def _rotation(job, T):
    cert = exact_rotation(T, job.max_period)
    out = cert.to_json()
    if cert.orientation == "preserving" and cert.kind != "undetermined":
        out["estimate"] = round(numeric_rotation(T, job.iterations, job.seed), 12)
    if job.emit_rays_csv:
        if cert.orientation != "preserving":
            U = iterate(T, 2)
        else:
            U = T
        angles = numeric_orbit_angles(U, min(job.iterations, 100_000), job.seed)
        with open(job.emit_rays_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "angle"])
            for k, a in enumerate(angles):
                w.writerow([k, f"{a:.15g}"])
    return out, EX_UNDETERMINED if cert.kind == "undetermined" else EX_OK


def _stability(job, T):
    fan = resolve_fan(job.fan)
    U = iterate(T, job.iterate) if job.iterate > 1 else T
    report = find_destabilizing_orbits(ToricModel(fan, U), job.bound)
    out = report.to_json()
    out["fan"] = fan.to_json()
    out["iterate"] = job.iterate
    return out, EX_UNDETERMINED if report.verdict == "unknown" else EX_OK


def _stabilize(job, T):
    res = stabilize(T, resolve_fan(job.fan), job.max_period, job.bound, empirical=job.empirical)
    if job.write_fan:
        Path(job.write_fan).write_text(json.dumps(res.fan.to_json()) + "\n")
    return res.to_json(), EX_OK


def _degrees(job, T):
    A = T.linear_matrix()
    if A is None:
        raise UsageError("map: degrees need a monomial (globally linear) map")
    return monomial_degrees(A).to_json(), EX_OK


def _verdict(job, T):
    v = corrigibility_verdict(T, job.max_period, job.bound, resolve_fan(job.fan))
    return v.to_json(), v.exit_code


_DISPATCH = {
    "tropicalize": _tropicalize,
    "rotation": _rotation,
    "stability": _stability,
    "stabilize": _stabilize,
    "degrees": _degrees,
    "verdict": _verdict,
}


def run(job: JobSpec) -> Tuple[dict, int]:
    """Run one validated job; returns the report and exit code.

    Domain errors become ``{"error": ...}`` reports, while usage problems
    raise :class:`UsageError`.
    """
    from .errors import NotStabilizable, UndeterminedRotation

    job.validate()
    try:
        maps = [resolve_map(m) for m in job.maps]
        if job.command == "compose":
            T = maps[-1]
            for S in reversed(maps[:-1]):
                T = compose(S, T)
            return _tropicalize(job, T.simplified())
        return _DISPATCH[job.command](job, maps[0])
    except NotStabilizable as exc:
        return {"error": str(exc), "type": "NotStabilizable"}, EX_NOT_STABILIZABLE
    except UndeterminedRotation as exc:
        return {"error": str(exc), "type": "UndeterminedRotation"}, EX_UNDETERMINED
    except ToricStabError as exc:
        out = {"error": str(exc), "type": type(exc).__name__}
        partial = getattr(exc, "log", None)
        if partial:
            out["partial_log"] = list(partial)
        return out, EX_DOMAIN


def _run_safe(job: JobSpec) -> Tuple[dict, int]:
    try:
        return run(job)
    except UsageError as exc:
        return {"error": str(exc), "type": "UsageError"}, EX_USAGE


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


# ---------------------------------------------------------------------------
# self test


def _subset_mismatch(expected, actual, path="") -> Optional[str]:
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            return f"{path or '/'}: expected an object"
        for k, v in expected.items():
            if k not in actual:
                return f"{path}/{k}: missing"
            bad = _subset_mismatch(v, actual[k], f"{path}/{k}")
            if bad:
                return bad
        return None
    if isinstance(expected, float) or isinstance(actual, float):
        try:
            if math.isclose(float(expected), float(actual), rel_tol=0, abs_tol=1e-9):
                return None
        except (TypeError, ValueError):
            pass
        return f"{path}: expected {expected!r}, got {actual!r}"
    if expected != actual:
        return f"{path}: expected {expected!r}, got {actual!r}"
    return None


def load_corpus(directory: Optional[Path] = None) -> List[dict]:
    directory = Path(directory) if directory else _bundled("corpus")
    entries = []
    for p in sorted(directory.glob("*.json")):
        entry = json.loads(p.read_text())
        entry.setdefault("name", p.stem)
        entries.append(entry)
    return entries


def self_test(directory: Optional[Path] = None) -> Tuple[dict, int]:
    entries = load_corpus(directory)
    results = []
    for e in entries:
        job = JobSpec.from_dict(e["job"])
        report, code = _run_safe(job)
        bad = _subset_mismatch(e.get("expected", {}), report)
        want_code = e.get("exit_code", EX_OK)
        if bad is None and code != want_code:
            bad = f"exit code {code}, expected {want_code}"
        results.append({"name": e["name"], "status": "fail" if bad else "pass", "mismatch": bad})
    failed = [r["name"] for r in results if r["status"] == "fail"]
    out = {"entries": results, "passed": len(results) - len(failed), "failed": failed}
    if not entries:
        out["warning"] = "corpus is empty"
        print("warning: corpus is empty", file=sys.stderr)
    return out, 1 if failed else EX_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EX_USAGE)


class _OrderedMaps(argparse.Action):
    """Collect --monomial and --map into one list, keeping command-line order."""

    def __call__(self, parser, namespace, values, option_string=None):
        maps = getattr(namespace, "maps", None) or []
        if option_string == "--monomial":
            try:
                nums = [int(t) for t in values.replace(",", " ").split()]
            except ValueError:
                parser.error(f"--monomial: expected four integers, got {values!r}")
            if len(nums) != 4:
                parser.error(f"--monomial: expected four integers, got {values!r}")
            maps.append({"monomial": nums})
        else:
            maps.append({"ref": values})
        namespace.maps = maps


def _seed(text: str) -> Tuple[int, int]:
    try:
        x, y = (int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers, got {text!r}")
    return x, y


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="toricstab", description="Toric stabilization of surface maps.")
    parser.add_argument("--timing", action="store_true", help="print elapsed time on stderr")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--monomial", action=_OrderedMaps, dest="maps", metavar='"a b c d"')
        p.add_argument("--map", action=_OrderedMaps, dest="maps", metavar="FILE|NAME")
        p.add_argument("--fan", default=None, help="p2, p1xp1, inline rays, or a file")
        p.add_argument("--max-period", type=int, default=24)
        p.add_argument("--bound", type=int, default=64)
        p.add_argument("--iterations", type=int, default=10_000)
        p.add_argument("--seed", type=_seed, default=(1, 0))
        p.add_argument("--iterate", type=int, default=1)
        p.add_argument("--empirical", action="store_true",
                       help="also test smaller iterates (stabilize)")
        p.add_argument("--emit-rays-csv", metavar="FILE", default=None)
        p.add_argument("--write-fan", metavar="FILE", default=None)

    st = sub.add_parser("self-test")
    st.add_argument("--corpus", type=Path, default=None)

    b = sub.add_parser("batch")
    b.add_argument("file", help="JSON array of jobs, or one job per line")
    b.add_argument("--jobs", type=int, default=1)
    return parser


def _load_batch(path: str) -> List[JobSpec]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"file: {exc}") from exc
    try:
        data = json.loads(text)
        if isinstance(data, dict):
            data = [data]
    except json.JSONDecodeError:
        try:
            data = [json.loads(line) for line in text.splitlines() if line.strip()]
        except json.JSONDecodeError as exc:
            raise UsageError(f"file: not JSON or JSON lines ({exc})") from exc
    return [JobSpec.from_dict(d) for d in data]


def _batch(args) -> Tuple[list, int]:
    jobs = _load_batch(args.file)
    if args.jobs < 1:
        raise UsageError("jobs: must be positive")
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_safe, jobs))
    else:
        results = [_run_safe(j) for j in jobs]
    reports = [{"report": r, "exit_code": c} for r, c in results]
    return reports, max((c for _, c in results if c != EX_USAGE), default=EX_OK)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(name)s: %(message)s")
    bits = os.environ.get("TORICSTAB_MAX_BIGINT_BITS", str(DEFAULT_MAX_BITS))
    try:
        set_max_bits(int(bits))
    except ValueError:
        print(f"toricstab: error: TORICSTAB_MAX_BIGINT_BITS must be an integer, got {bits!r}",
              file=sys.stderr)
        return EX_USAGE

    t0 = time.perf_counter()
    try:
        if args.command == "self-test":
            report, code = self_test(args.corpus)
        elif args.command == "batch":
            report, code = _batch(args)
        else:
            job = JobSpec(
                command=args.command,
                maps=args.maps or [],
                fan=args.fan,
                max_period=args.max_period,
                bound=args.bound,
                iterations=args.iterations,
                seed=args.seed,
                iterate=args.iterate,
                empirical=args.empirical,
                emit_rays_csv=args.emit_rays_csv,
                write_fan=args.write_fan,
            )
            report, code = run(job)
    except UsageError as exc:
        print(f"toricstab: error: {exc}", file=sys.stderr)
        return EX_USAGE
    finally:
        if args.timing:
            print(f"elapsed {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    print(dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
