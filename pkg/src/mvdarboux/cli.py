"""Command-line front end.

Every subcommand reads a JSON config and writes a JSON document (to ``--out``
or stdout).  Exit codes: 0 success, 2 factorisation failure, 3 no poised
node set, 4 verification failure, 5 bad config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Any

from .block_linalg import DEFAULT_SINGULAR_TOL, SingularBlock
from .darboux import (
    DEFAULT_POISED_TOL,
    DarbouxSpec,
    NodeSet,
    NotPoised,
    OffVarietyError,
    TruncationTooSmall,
    build_sample_matrices,
    coefficient_deviation,
    christoffel_transform,
    ideal_vandermonde_rank,
    kernel_check,
    node_count_diagnostics,
    oracle_family,
    poisedness,
    resolvent_band_identities,
    resolvent_via_two_choleskys,
    sigma_factorization_check,
)
from .graded_basis import CapacityError
from .measures import BoxMeasure, DiscreteMeasure, MomentFunctional
from .mvopr import MVOPRFamily, build_family
from .nodes import BudgetExhausted, HypersurfaceSampler, RootFindingError, search_poised
from .poly import InexactDivision, MPoly, format_poly, parse_poly
from .scalars import FLOAT, MODES, RATIONAL, GaussianRational, format_scalar, magnitude, parse_scalar

EXIT_OK = 0
EXIT_FACTORIZATION = 2
EXIT_POISEDNESS = 3
EXIT_VERIFICATION = 4
EXIT_CONFIG = 5

DEFAULT_VERIFY_TOL = 1e-9
DEFAULT_BUDGET = 50

ENV_TOLERANCES = {
    "singular": "MVDARBOUX_SINGULAR_TOL",
    "poised": "MVDARBOUX_POISED_TOL",
    "verify": "MVDARBOUX_VERIFY_TOL",
}


class ConfigError(ValueError):
    pass


class CommandFailure(Exception):
    def __init__(self, code: int, message: str, report: dict | None = None):
        super().__init__(message)
        self.code = code
        self.report = report


def jsonable(x: Any) -> Any:
    """Exact scalars become strings, floats stay numbers, containers recurse."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, (Fraction, GaussianRational, complex)):
        return format_scalar(x)
    if isinstance(x, MPoly):
        return format_poly(x)
    if hasattr(x, "item"):
        return jsonable(x.item())
    if isinstance(x, float):
        return x
    return str(x)


# config


class RunConfig:
    """Validated view of a JSON config plus command-line overrides."""

    def __init__(self, doc: dict, scalar: str | None = None, seed: int | None = None):
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        self.doc = doc
        self.mode = scalar or doc.get("scalar", RATIONAL)
        if self.mode not in MODES:
            raise ConfigError(f"scalar must be one of {MODES}, got {self.mode!r}")
        try:
            self.degree = int(doc["degree"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("config needs an integer 'degree' (truncation degree L)") from None
        if self.degree < 0:
            raise ConfigError("degree must be >= 0")
        self.tolerances = self._tolerances(doc.get("tolerances", {}))
        search = doc.get("search", {})
        self.budget = int(search.get("budget", DEFAULT_BUDGET))
        self.seed = int(seed if seed is not None else search.get("seed", 0))
        self.plain_only = bool(search.get("plain_only", False))
        self.measure_doc = doc.get("measure")
        self.dim = int(doc["dimension"]) if "dimension" in doc else self._infer_dim()
        self.darboux_doc = doc.get("darboux", {})
        ks = doc.get("transform_degrees", [0])
        if isinstance(ks, int):
            ks = [ks]
        self.transform_degrees = [int(k) for k in ks]
        self.sampler_docs = search.get("samplers")

    def _infer_dim(self) -> int:
        m = self.measure_doc or {}
        if m.get("type") == "box" and m.get("bounds"):
            return len(m["bounds"])
        if m.get("type") == "discrete" and m.get("points"):
            return len(m["points"][0])
        raise ConfigError("cannot infer 'dimension'; set it explicitly")

    @staticmethod
    def _tolerances(doc: dict) -> dict:
        tol = {"singular": DEFAULT_SINGULAR_TOL, "poised": DEFAULT_POISED_TOL, "verify": DEFAULT_VERIFY_TOL}
        for key, value in doc.items():
            if key not in tol:
                raise ConfigError(f"unknown tolerance {key!r}")
            tol[key] = float(value)
        for key, var in ENV_TOLERANCES.items():
            if var in os.environ:
                try:
                    tol[key] = float(os.environ[var])
                except ValueError:
                    raise ConfigError(f"{var} is not a number") from None
        return tol

    def measure(self) -> MomentFunctional:
        m = self.measure_doc
        if not isinstance(m, dict):
            raise ConfigError("config needs a 'measure' object")
        kind = m.get("type")
        if kind == "box":
            bounds = [(parse_scalar(a, self.mode), parse_scalar(b, self.mode)) for a, b in m["bounds"]]
            if len(bounds) != self.dim:
                raise ConfigError("box bounds do not match dimension")
            weight = parse_poly(str(m["weight"]), self.dim, self.mode) if "weight" in m else None
            return BoxMeasure(bounds, weight)
        if kind == "discrete":
            points = [[parse_scalar(v, self.mode) for v in p] for p in m["points"]]
            weights = [parse_scalar(w, self.mode) for w in m["weights"]]
            return DiscreteMeasure(points, weights)
        raise ConfigError(f"unknown measure type {kind!r}")

    def spec(self) -> DarbouxSpec:
        return DarbouxSpec.from_dict(self.darboux_doc, self.dim, self.mode)

    def samplers(self, spec: DarbouxSpec) -> list[HypersurfaceSampler]:
        docs = self.sampler_docs or [{} for _ in spec.factors]
        if len(docs) != len(spec.factors):
            raise ConfigError("need one sampler entry per factor")
        out = []
        for (r, _), d in zip(spec.factors, docs):
            anchor = tuple(parse_scalar(v, RATIONAL) for v in d["anchor"]) if "anchor" in d else None
            points = [tuple(parse_scalar(v, self.mode) for v in p) for p in d["points"]] if "points" in d else None
            out.append(HypersurfaceSampler(r, d.get("strategy"), points, anchor))
        return out

    def given_nodes(self, k: int) -> NodeSet | None:
        """Nodes from the config: a list (single transform degree) or a map keyed by degree."""
        nodes = self.darboux_doc.get("nodes")
        if "node_file" in self.darboux_doc:
            with open(self.darboux_doc["node_file"]) as fh:
                nodes = json.load(fh)
            if isinstance(nodes, dict) and "nodes" in nodes and "k" in nodes:
                nodes = {str(nodes["k"]): nodes["nodes"]}
        if nodes is None:
            return None
        if isinstance(nodes, dict):
            entries = nodes.get(str(k))
            if entries is None:
                return None
        else:
            if len(self.transform_degrees) != 1:
                raise ConfigError("a plain node list needs exactly one transform degree")
            entries = nodes
        return NodeSet.from_dict({"nodes": entries}, self.dim, self.mode)


def load_config(path: str, scalar: str | None, seed: int | None) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return RunConfig(doc, scalar, seed)


# pipeline pieces


def _family(cfg: RunConfig) -> MVOPRFamily:
    try:
        return build_family(cfg.measure(), cfg.degree, cfg.mode, cfg.tolerances["singular"])
    except SingularBlock as exc:
        raise CommandFailure(EXIT_FACTORIZATION, str(exc)) from None


def _route_mode(cfg: RunConfig, spec: DarbouxSpec) -> bool:
    """Switch to float when auto-sampled nodes cannot be exact; returns True if switched."""
    if cfg.mode != RATIONAL or not spec.factors:
        return False
    if all(cfg.given_nodes(k) is not None for k in cfg.transform_degrees):
        return False
    if all(s.exact for s in cfg.samplers(spec)):
        return False
    cfg.mode = FLOAT
    return True


def _nodes_for(cfg: RunConfig, fam: MVOPRFamily, spec: DarbouxSpec, k: int) -> tuple[NodeSet, dict]:
    given = cfg.given_nodes(k)
    if spec.m == 0:
        return NodeSet([]), {"source": "none"}
    if given is not None:
        return given, {"source": "config"}
    try:
        res = search_poised(fam, spec, k, cfg.budget, cfg.seed + k, cfg.samplers(spec),
                            plain_only=cfg.plain_only, tol=cfg.tolerances["poised"])
    except BudgetExhausted as exc:
        raise CommandFailure(EXIT_POISEDNESS, f"degree {k}: {exc}") from None
    return res.nodes, {"source": "search", "attempts": res.attempts, "seed": cfg.seed + k}


def _exceeds(value: Any, tol: float, exact: bool) -> bool:
    if exact:
        return value != 0
    return magnitude(value) > tol


def cmd_compute(cfg: RunConfig) -> dict:
    fam = _family(cfg)
    return fam.to_dict()


def cmd_darboux(cfg: RunConfig, verify: bool) -> tuple[dict, int]:
    spec = cfg.spec()
    routed = _route_mode(cfg, spec)
    if routed:
        spec = cfg.spec()
    fam = _family(cfg)
    tfam = None
    if verify:
        try:
            tfam = oracle_family(fam, spec.Q, cfg.tolerances["singular"])
        except SingularBlock as exc:
            raise CommandFailure(EXIT_FACTORIZATION, f"perturbed measure: {exc}") from None
    transforms = []
    code = EXIT_OK
    for k in cfg.transform_degrees:
        nodes, origin = _nodes_for(cfg, fam, spec, k)
        entry: dict[str, Any] = {"k": k, "nodes": nodes.to_dict()["nodes"], "node_source": origin}
        if spec.m:
            sm = build_sample_matrices(fam, spec, nodes, k)
            pz = poisedness(sm.sigma, cfg.tolerances["poised"])
            entry["poisedness"] = pz.to_dict()
            if not pz.poised:
                raise CommandFailure(EXIT_POISEDNESS, f"degree {k}: node set is not poised",
                                     _warnings_report(spec, nodes, k))
        tp = christoffel_transform(fam, spec, nodes, k, cfg.tolerances["poised"])
        entry["polynomials"] = [format_poly(p) for p in tp]
        if tfam is not None:
            dev = coefficient_deviation(tp, tfam.polynomial_block(k))
            entry["deviation"] = _violation(dev, fam.mode == RATIONAL)
            if _exceeds(dev, cfg.tolerances["verify"], fam.mode == RATIONAL):
                code = EXIT_VERIFICATION
        transforms.append(entry)
    report = {"scalar": fam.mode, "routed_to_float": routed, "degree": fam.degree, "darboux": spec.to_dict(),
              "Q": format_poly(spec.Q), "transforms": transforms}
    return report, code


def _warnings_report(spec: DarbouxSpec, nodes: NodeSet, k: int) -> dict:
    return {"diagnostics": node_count_diagnostics(spec, nodes, k)}


def cmd_poised_check(cfg: RunConfig) -> tuple[dict, int]:
    spec = cfg.spec()
    fam = _family(cfg)
    results = []
    code = EXIT_OK
    for k in cfg.transform_degrees:
        nodes = cfg.given_nodes(k)
        if nodes is None:
            raise ConfigError(f"poised-check needs nodes for degree {k}")
        sm = build_sample_matrices(fam, spec, nodes, k)
        pz = poisedness(sm.sigma, cfg.tolerances["poised"])
        entry = {"k": k, **pz.to_dict(), "diagnostics": node_count_diagnostics(spec, nodes, k),
                 "ideal": ideal_vandermonde_rank(spec, nodes, k, fam.mode)}
        if not pz.poised:
            code = EXIT_POISEDNESS
        results.append(entry)
    return {"scalar": fam.mode, "Q": format_poly(spec.Q), "checks": results}, code


VIOLATION_KEYS = ("band", "top_band", "diagonal", "adjoint_form", "lu", "ul", "determinant")


def _violation(v: Any, exact: bool) -> Any:
    # one JSON type per report: exact strings or floats
    return Fraction(v) if exact and not isinstance(v, GaussianRational) else (v if exact else float(abs(v)))


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    spec = cfg.spec()
    routed = _route_mode(cfg, spec)
    if routed:
        spec = cfg.spec()
    fam = _family(cfg)
    exact = fam.mode == RATIONAL
    tol = cfg.tolerances["verify"]
    try:
        res = resolvent_via_two_choleskys(fam, spec.Q, tol=cfg.tolerances["singular"])
    except SingularBlock as exc:
        raise CommandFailure(EXIT_FACTORIZATION, f"perturbed measure: {exc}") from None
    identities = resolvent_band_identities(res)
    failed = [key for key in VIOLATION_KEYS
              if _exceeds(identities[key], tol, exact)]
    transforms = []
    for k in cfg.transform_degrees:
        nodes, origin = _nodes_for(cfg, fam, spec, k)
        tp = christoffel_transform(fam, spec, nodes, k, cfg.tolerances["poised"])
        dev = coefficient_deviation(tp, res.tfam.polynomial_block(k))
        entry = {"k": k, "node_source": origin, "deviation": dev}
        if spec.m:
            entry["kernel_residual"] = kernel_check(res, spec, nodes)
            entry["sample_factorization"] = sigma_factorization_check(fam, spec, nodes, k)
        for key in ("deviation", "kernel_residual", "sample_factorization"):
            if key in entry and _exceeds(entry[key], tol, exact):
                failed.append(f"{key}[k={k}]")
        transforms.append(entry)
    identities.pop("determinant_checks", None)
    for key in VIOLATION_KEYS + ("max_violation",):
        identities[key] = _violation(identities[key], exact)
    for entry in transforms:
        for key in ("deviation", "kernel_residual", "sample_factorization"):
            if key in entry:
                entry[key] = _violation(entry[key], exact)
    report = {"scalar": fam.mode, "routed_to_float": routed, "degree": fam.degree, "Q": format_poly(spec.Q),
              "identities": identities, "transforms": transforms, "failed": failed, "passed": not failed}
    return report, (EXIT_VERIFICATION if failed else EXIT_OK)


def cmd_sample_nodes(cfg: RunConfig) -> dict:
    """Node sets per transform degree; ``nodes`` can be pasted into ``darboux.nodes``."""
    spec = cfg.spec()
    routed = _route_mode(cfg, spec)
    if routed:
        spec = cfg.spec()
    fam = _family(cfg)
    nodes_by_k, sources = {}, {}
    for k in cfg.transform_degrees:
        nodes, origin = _nodes_for(cfg, fam, spec, k)
        nodes_by_k[str(k)] = nodes.to_dict()["nodes"]
        sources[str(k)] = origin
    return {"scalar": fam.mode, "routed_to_float": routed, "nodes": nodes_by_k, "sources": sources}


# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvdarboux", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("compute", "factor the moment matrix and write the family"),
        ("darboux", "compute transformed polynomials from nodes"),
        ("poised-check", "test whether configured nodes are poised"),
        ("verify", "check resolvent identities and compare with the oracle"),
        ("sample-nodes", "search for a poised node set and write it"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override search seed")
        p.add_argument("--scalar", choices=MODES, default=None, help="arithmetic mode")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        if name == "darboux":
            p.add_argument("--verify", action="store_true", help="compare with the oracle family")
    return parser


def _write(doc: dict, out: str | None) -> None:
    text = json.dumps(jsonable(doc), indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    report: dict | None = None
    try:
        cfg = load_config(args.config, args.scalar, args.seed)
        code = EXIT_OK
        if args.command == "compute":
            report = cmd_compute(cfg)
        elif args.command == "darboux":
            report, code = cmd_darboux(cfg, args.verify)
        elif args.command == "poised-check":
            report, code = cmd_poised_check(cfg)
        elif args.command == "verify":
            report, code = cmd_verify(cfg)
        else:
            report = cmd_sample_nodes(cfg)
    except CommandFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.report is not None:
            _write(exc.report, args.out)
        return exc.code
    except NotPoised as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POISEDNESS
    except (ConfigError, TruncationTooSmall, OffVarietyError, CapacityError, RootFindingError,
            KeyError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InexactDivision as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    _write(report, args.out)
    if code == EXIT_VERIFICATION:
        print("error: verification failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
