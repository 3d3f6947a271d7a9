"""Command-line harness: surveys, fixture checks, fixed-point algebra and isotropy reports."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import backend
from .kernels import parse_kernel
from .loss import LossProblem, loss
from .optimize import GDConfig, NotCriticalError, classify, polish_newton, refine_symmetric, survey
from .symmetry import canonical_align, isotropy_group, label_isotropy, label_matrix
from .tensor_core import read_matrix_csv, write_matrix_csv

DUST = 1e-12
TARGETS = ("identity", "laplacian", "file")


def fmt(x) -> str:
    """Decimal with 17 significant digits; exact rationals as num/den."""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return f"{x:.17g}"


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, np.integer):
        return str(int(obj))
    return json.dumps(obj, ensure_ascii=False)


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: str = "poly:3"
    target: str = "identity"
    d: int = 12
    target_file: str = ""
    k: int = 0  # 0 means k = number of target rows
    n_starts: int = 100
    half: bool = True
    output: str = "symbreak-run"
    workers: int = 0  # 0 means SYMBREAK_THREADS or all cores
    heatmaps: bool = True
    label: bool = True
    # gradient descent and post-processing
    seed: int = 0
    step: str = "backtracking"
    eta: float = 0.5
    beta: float = 0.5
    c1: float = 1e-4
    max_iter: int = 500_000
    eps_g: float = 1e-10
    polish: bool = True
    symmetrize: bool = True
    dedup_tol: float = 1e-6
    iso_tol: float = 1e-6
    eps_h: float = 1e-6

    def __post_init__(self) -> None:
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}")
        if self.target == "file" and not Path(self.target_file).is_file():
            raise ValueError(f"target_file {self.target_file!r} does not exist")
        if self.k < 0 or self.d < 1 or self.n_starts < 0:
            raise ValueError("need k >= 0, d >= 1 and n_starts >= 0")
        parse_kernel(self.kernel)
        self.gd_config()

    def gd_config(self) -> GDConfig:
        names = {f.name for f in fields(GDConfig)}
        return GDConfig(**{k: v for k, v in asdict(self).items() if k in names})

    def target_matrix(self) -> np.ndarray:
        if self.target == "identity":
            return np.eye(self.d)
        if self.target == "laplacian":
            return laplacian_target(self.d)
        return read_matrix_csv(self.target_file)

    def problem(self) -> LossProblem:
        return LossProblem(parse_kernel(self.kernel), self.target_matrix(), self.half)

    def to_toml(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                text = "true" if v else "false"
            elif isinstance(v, str):
                text = json.dumps(v)
            elif isinstance(v, float):
                text = repr(v)
            else:
                text = str(v)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"


def _coerce(name: str, raw, typ):
    if typ == "bool" and isinstance(raw, str):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: not a boolean: {raw!r}")
    if typ == "int":
        if isinstance(raw, float) and not raw.is_integer():
            raise ValueError(f"{name}: not an integer: {raw!r}")
        return int(float(raw)) if isinstance(raw, str) else int(raw)
    if typ == "float":
        return float(raw)
    if typ == "bool":
        return bool(raw)
    return str(raw)


def load_config(path: str | None = None, overrides: Sequence[str] = ()) -> ExperimentConfig:
    """Flat TOML file (optional) followed by ``key=value`` overrides."""
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    values: dict = {}
    if path:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        for key, val in data.items():
            if isinstance(val, dict):
                raise ValueError(f"config must be flat; table [{key}] found")
            values[key] = val
    for item in overrides:
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"override {item!r} is not key=value")
        values[key.strip()] = val.strip()
    unknown = set(values) - set(types)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if path and values.get("target_file"):
        tf = Path(str(values["target_file"]))
        if not tf.is_absolute() and not tf.exists():
            values["target_file"] = str(Path(path).parent / tf)
    return ExperimentConfig(**{k: _coerce(k, v, types[k]) for k, v in values.items()})


def laplacian_target(d: int) -> np.ndarray:
    """Circulant matrix with first row (-2, 1, 0, ..., 0, 1)."""
    if d < 3:
        raise ValueError("the circulant Laplacian needs d >= 3")
    row = np.zeros(d)
    row[0], row[1], row[-1] = -2.0, 1.0, 1.0
    return np.stack([np.roll(row, i) for i in range(d)])


# -- output helpers -----------------------------------------------------------


def _lerp(a, b, t):
    return tuple(round(x + (y - x) * t) for x, y in zip(a, b))


BLUE, WHITE, RED = (33, 102, 172), (247, 247, 247), (178, 24, 43)


def diverging_color(x: float, scale: float) -> str:
    """Blue for negative, white at zero, red for positive."""
    t = 0.0 if scale == 0 else max(-1.0, min(1.0, x / scale))
    rgb = _lerp(WHITE, RED, t) if t >= 0 else _lerp(WHITE, BLUE, -t)
    return "#%02x%02x%02x" % rgb


def heatmap_svg(W: np.ndarray, cell: int = 24, title: str = "") -> str:
    W = np.atleast_2d(np.asarray(W, dtype=float))
    k, d = W.shape
    scale = float(np.max(np.abs(W))) if W.size else 0.0
    top = 20 if title else 0
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{d * cell}" height="{k * cell + top}" '
        f'viewBox="0 0 {d * cell} {k * cell + top}">'
    ]
    if title:
        out.append(f'<text x="2" y="14" font-family="sans-serif" font-size="12">{_escape(title)}</text>')
    for i in range(k):
        for j in range(d):
            out.append(
                f'<rect x="{j * cell}" y="{i * cell + top}" width="{cell}" height="{cell}" '
                f'fill="{diverging_color(W[i, j], scale)}"><title>{fmt(W[i, j])}</title></rect>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def load_fixture_matrix(path) -> np.ndarray:
    W = read_matrix_csv(path)
    W[np.abs(W) < DUST] = 0.0
    return W


# -- survey ------------------------------------------------------------------


def _levels(records, tol: float = 1e-6) -> list[dict]:
    rows: list[dict] = []
    for rec in records:
        if not rec.converged:
            continue
        is_min = rec.min_eig is not None and rec.min_eig >= -1e-6 * max(1.0, rec.max_eig or 0.0)
        for row in rows:
            if row["is_min"] == is_min and abs(row["loss"] - rec.loss) <= tol * max(1.0, abs(rec.loss)):
                row["count"] += rec.hits
                if rec.isotropy and rec.isotropy not in row["labels"]:
                    row["labels"].append(rec.isotropy)
                break
        else:
            rows.append({"loss": rec.loss, "count": rec.hits, "is_min": is_min, "labels": [rec.isotropy] if rec.isotropy else []})
    rows.sort(key=lambda r: (r["loss"], not r["is_min"]))
    return rows


def run_survey(cfg: ExperimentConfig) -> tuple[list, list[dict]]:
    problem = cfg.problem()
    k = cfg.k or problem.V.shape[0]
    records = survey(problem, cfg.n_starts, cfg.gd_config(), k, workers=cfg.workers or None, label=cfg.label)
    return records, _levels(records)


def write_survey(cfg: ExperimentConfig, records, levels, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.toml").write_text(cfg.to_toml())
    with open(out / "records.jsonl", "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(
                dumps(
                    {
                        "seed": rec.seed,
                        "status": rec.status,
                        "loss": rec.loss,
                        "grad_norm": rec.grad_norm,
                        "min_eig": rec.min_eig,
                        "max_eig": rec.max_eig,
                        "isotropy": rec.isotropy,
                        "iterations": rec.iterations,
                        "hits": rec.hits,
                        "matrix": np.asarray(rec.W).tolist(),
                    }
                )
                + "\n"
            )
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["loss", "count", "kind", "label"])
        for row in levels:
            w.writerow([fmt(row["loss"]), row["count"], "min" if row["is_min"] else "saddle", " | ".join(row["labels"])])
    if cfg.heatmaps:
        mdir = out / "minima"
        mdir.mkdir(exist_ok=True)
        for n, rec in enumerate(r for r in records if r.converged):
            stem = f"min_{n:03d}_seed{rec.seed}"
            write_matrix_csv(rec.W, mdir / f"{stem}.csv")
            title = f"loss {fmt(rec.loss)}" + (f"  {rec.isotropy}" if rec.isotropy else "")
            (mdir / f"{stem}.svg").write_text(heatmap_svg(rec.W, title=title), encoding="utf-8")


def cmd_survey(args) -> int:
    cfg = load_config(args.config, args.set or ())
    if args.out:
        cfg = replace(cfg, output=args.out)
    records, levels = run_survey(cfg)
    write_survey(cfg, records, levels, Path(cfg.output))
    print(f"backend {backend.NAME}; {len(records)} distinct records from {cfg.n_starts} starts -> {cfg.output}")
    for row in levels:
        kind = "min   " if row["is_min"] else "saddle"
        print(f"{kind} loss {fmt(row['loss'])}  x{row['count']}  {' | '.join(row['labels'])}")
    return 0 if any(r.converged for r in records) or cfg.n_starts == 0 else 1


# -- fixtures ----------------------------------------------------------------


def fixture_dir() -> Path:
    return Path(str(resources.files("symbreak") / "data" / "fixtures"))


def load_fixture_index(directory: Path | None = None) -> list[dict]:
    directory = directory or fixture_dir()
    return json.loads((directory / "fixtures.json").read_text(encoding="utf-8"))


def verify_fixture(entry: dict, directory: Path | None = None, W=None) -> dict:
    """Polish, check loss/gradient/curvature and compare the isotropy label with the caption."""
    directory = directory or fixture_dir()
    W = load_fixture_matrix(directory / entry["file"]) if W is None else np.asarray(W, dtype=float)
    problem = LossProblem(parse_kernel(entry["kernel"]), np.eye(entry["d"]))
    out = {"name": entry["name"], "caption_loss": entry["caption_loss"], "caption_label": entry["caption_label"]}
    L0 = loss(problem, W)
    rec = polish_newton(problem, W, tol=1e-10)
    out.update(loss_raw=L0, loss=rec.loss, grad_norm=rec.grad_norm, moved=float(np.max(np.abs(rec.W - W))))
    out["grad_ok"] = bool(np.isfinite(rec.grad_norm) and rec.grad_norm <= 1e-8)
    out["loss_ok"] = bool(abs(rec.loss - entry["caption_loss"]) <= 1e-4)
    try:
        info = classify(problem, rec.W, 1e-6, eps_g=1e-8)
        Wsym = rec.W
        if info["is_second_order_min"]:
            Wsym, _ = refine_symmetric(problem, rec.W, 1e-10, 1e-6)
        out.update(min_eig=info["min_eig"], max_eig=info["max_eig"], psd_ok=bool(info["is_second_order_min"]))
    except NotCriticalError:
        Wsym = rec.W
        out.update(min_eig=None, max_eig=None, psd_ok=False)
    out["label"] = label_matrix(Wsym, 1e-6) if np.all(np.isfinite(Wsym)) else "?"
    out["label_match"] = out["label"] == entry["caption_label"]
    out["label_asserted"] = bool(entry.get("assert_label", True))
    out["passed"] = out["grad_ok"] and out["loss_ok"] and out["psd_ok"] and (out["label_match"] or not out["label_asserted"])
    return out


def cmd_verify_fixtures(args) -> int:
    directory = Path(args.dir) if args.dir else fixture_dir()
    entries = load_fixture_index(directory)
    if args.only:
        entries = [e for e in entries if e["name"] in args.only]
    ok = True
    for e in entries:
        r = verify_fixture(e, directory)
        ok &= r["passed"]
        label_note = "match" if r["label_match"] else ("MISMATCH" if r["label_asserted"] else "differs (reported only)")
        print(f"{'PASS' if r['passed'] else 'FAIL'} {r['name']}")
        print(f"  loss {fmt(r['loss'])} (caption {fmt(r['caption_loss'])}, {'ok' if r['loss_ok'] else 'off'})")
        print(f"  grad_norm {fmt(r['grad_norm'])} ({'ok' if r['grad_ok'] else 'too large'})")
        if r["min_eig"] is not None:
            print(f"  hessian eigs [{fmt(r['min_eig'])}, {fmt(r['max_eig'])}] ({'psd' if r['psd_ok'] else 'NOT psd'})")
        print(f"  label {r['label']} vs caption {r['caption_label']}: {label_note}")
    return 0 if ok else 1


# -- fixed-point algebra -----------------------------------------------------


def appendix_polys() -> dict:
    from .algebra import MultiPoly

    base = resources.files("symbreak") / "data" / "polys"
    return {
        f"g{i}": MultiPoly.parse((base / f"g{i}.txt").read_text(encoding="utf-8"), ("w1", "w2", "d"))
        for i in range(1, 5)
    }


def cmd_fpspace(args) -> int:
    from .algebra import reduce, restrict_loss_symbolic, restricted_partials, solve_restricted

    if parse_kernel(args.kernel).id != "poly:3":
        print("fpspace supports the poly:3 kernel only", file=sys.stderr)
        return 2
    L = restrict_loss_symbolic(3, args.spec)
    print(f"loss: {L.to_text()}")
    for v, p in zip([v for v in L.vars if v != "d"], restricted_partials(L)):
        print(f"d/d{v}: {p.to_text()}")
    rep = solve_restricted(args.d, args.spec)
    ok = True
    last = rep.basis.vars[-1]
    print(f"basis at d={args.d}: {len(rep.basis)} elements")
    for p in rep.basis:
        print(f"  {p.to_text()}")
    print(f"distinct real roots in {last}: {rep.distinct_roots} (bound 20: {'ok' if rep.distinct_roots <= 20 else 'EXCEEDED'})")
    ok &= rep.distinct_roots <= 20
    for rt in rep.roots:
        val = fmt(rt.exact) if rt.exact is not None else fmt(rt.value)
        print(f"  {last} = {val}  multiplicity {rt.multiplicity}")
    for note in rep.degenerate:
        print(f"degenerate: {note}")
    print("solutions:")
    for s in rep.solutions:
        coords = ", ".join(fmt(c) if isinstance(c, Fraction) else fmt(float(c)) for c in s.coords)
        good = s.grad_norm <= 1e-8
        ok &= good
        print(f"  ({coords})  residual {fmt(s.residual)}  full grad {fmt(s.grad_norm)} {'ok' if good else 'FAIL'}")
    if rep.spec == "DeltaSd":
        for name, g in appendix_polys().items():
            member = reduce(g.substitute("d", args.d), rep.basis).is_zero()
            ok &= member
            print(f"{name} in ideal: {'yes' if member else 'NO'}")
    return 0 if ok else 1


def cmd_groebner(args) -> int:
    from .algebra import MultiPoly, groebner_lex

    lines = [ln.strip() for ln in Path(args.file).read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    vars = tuple(v.strip() for v in args.vars.split(",")) if args.vars else None
    subs = {}
    for item in args.subs or ():
        key, _, val = item.partition("=")
        subs[key.strip()] = Fraction(val.strip())
    allv = tuple(vars or ()) + tuple(subs)
    polys = []
    for ln in lines:
        p = MultiPoly.parse(ln, allv if vars else None)
        for key, val in subs.items():
            if key in p.vars:
                p = p.substitute(key, val)
        polys.append(p)
    G = groebner_lex(polys, vars)
    for p in G:
        print(p.to_text())
    return 0


# -- isotropy ----------------------------------------------------------------


def cmd_isotropy(args) -> int:
    W = load_fixture_matrix(args.file)
    group = isotropy_group(W, args.tol)
    print(f"label: {label_matrix(W, args.tol, ascii=args.ascii)}")
    print(f"full group label: {label_isotropy(group, ascii=args.ascii)}")
    print(f"order: {group.order}{'' if group.exact else ' (lower bound)'}")
    if group.ambiguous:
        print("warning: entries close to the tolerance; grouping is ambiguous")
    print("generators:")
    for g in group.generators:
        print(f"  {g}")
    pair, _ = canonical_align(W, args.tol)
    print(f"aligning permutation: {pair}")
    return 0


def cmd_print_config(args) -> int:
    cfg = load_config(args.config, args.set or ()) if (args.config or args.set) else ExperimentConfig()
    sys.stdout.write(cfg.to_toml())
    return 0


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symbreak", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("survey", help="multi-start descent with isotropy labels")
    p.add_argument("--config", help="flat TOML config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--out", help="output directory (overrides config)")
    p.set_defaults(func=cmd_survey)

    p = sub.add_parser("verify-fixtures", help="polish and check the bundled appendix matrices")
    p.add_argument("--dir", help="fixture directory containing fixtures.json")
    p.add_argument("--only", nargs="*", help="fixture names to check")
    p.set_defaults(func=cmd_verify_fixtures)

    p = sub.add_parser("fpspace", help="restricted loss, exact critical points and ideal membership")
    p.add_argument("--spec", default="DeltaSd", choices=["DeltaSd", "SdxSd"])
    p.add_argument("--d", type=int, default=12)
    p.add_argument("--kernel", default="poly:3")
    p.set_defaults(func=cmd_fpspace)

    p = sub.add_parser("isotropy", help="isotropy label and generators of a matrix CSV")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--ascii", action="store_true")
    p.set_defaults(func=cmd_isotropy)

    p = sub.add_parser("groebner", help="reduced lex basis of polynomials listed one per line")
    p.add_argument("file")
    p.add_argument("--vars", help="comma separated variable priority, highest first")
    p.add_argument("--subs", action="append", metavar="VAR=VALUE", help="substitute a rational value")
    p.set_defaults(func=cmd_groebner)

    p = sub.add_parser("print-config", help="print the (default or merged) configuration")
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_print_config)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, tomllib.TOMLDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
