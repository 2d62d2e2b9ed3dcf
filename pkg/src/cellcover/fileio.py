"""JSON serialization for groups, candidates, verdicts, and reports.

UTF-8 JSON throughout; rationals as "num/den" decimal strings, "inf" for
infinite heights, big integers as decimal strings.  Dumps are canonical
(sorted keys, fixed separators), so identical inputs give byte-identical
files.
"""

import json
from fractions import Fraction

from .constructions import CellularCandidate, SigmaAssignment
from .groups import (
    Basis,
    CompletionAmbient,
    CompletionFamily,
    CongruenceConstantRule,
    ConstantRule,
    ElementExpr,
    GroupPresentation,
    PrimeFamily,
    SigmaRule,
    TableRule,
)
from .homsolver import Homomorphism
from .rankone import INF, HeightSequence
from .valuations import (
    CompletionElement,
    IndependenceVerdict,
    MultiplicativeSet,
    PrimeClass,
)

FORMAT_VERSION = 1


class GroupFileError(ValueError):
    """Malformed group or bundle file."""


def _frac_str(x):
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def _parse_frac(s):
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(s)


def _height_str(h):
    return "inf" if h == INF else int(h)


def _parse_height(v):
    return INF if v == "inf" else int(v)


def height_sequence_to_json(h):
    return {
        "default": _height_str(h.default),
        "exceptions": {str(p): _height_str(v) for p, v in h.exceptions},
    }


def height_sequence_from_json(d):
    return HeightSequence.of(
        _parse_height(d["default"]),
        {int(p): _parse_height(v) for p, v in d.get("exceptions", {}).items()},
    )


def element_to_json(x):
    return {s: _frac_str(c) for s, c in x.coords}


def element_from_json(d):
    return ElementExpr.of({s: _parse_frac(c) for s, c in d.items()})


def prime_class_to_json(c):
    return {
        "kind": c.kind,
        "primes": list(c.primes),
        "excluded": list(c.excluded),
        "forced": [list(t) for t in c.forced],
        "side": c.side,
    }


def prime_class_from_json(d):
    return PrimeClass(
        d["kind"],
        primes=tuple(d.get("primes", ())),
        excluded=tuple(d.get("excluded", ())),
        forced=tuple(tuple(t) for t in d.get("forced", ())),
        side=d.get("side", 0),
    )


def sigma_to_json(a):
    return {
        "q": a.q,
        "pairs": [[_frac_str(z), r] for z, r in a.pairs],
        "numerator_bound": a.numerator_bound,
        "exponent_bound": a.exponent_bound,
        "declared_total": a.declared_total,
    }


def sigma_from_json(d):
    return SigmaAssignment(
        q=d["q"],
        pairs=tuple((_parse_frac(z), r) for z, r in d["pairs"]),
        numerator_bound=d["numerator_bound"],
        exponent_bound=d["exponent_bound"],
        declared_total=d["declared_total"],
    )


def rule_to_json(rule):
    if isinstance(rule, ConstantRule):
        return {"kind": "constant", "value": element_to_json(rule.value)}
    if isinstance(rule, CongruenceConstantRule):
        return {"kind": "congruence-constant", "value": element_to_json(rule.value)}
    if isinstance(rule, TableRule):
        return {
            "kind": "table",
            "entries": {str(p): element_to_json(z) for p, z in rule.entries},
            "extension": None
            if rule.extension is None
            else element_to_json(rule.extension),
        }
    if isinstance(rule, SigmaRule):
        return {
            "kind": "sigma",
            "b_default": element_to_json(rule.b_default),
            "b_table": {str(p): element_to_json(z) for p, z in rule.b_table},
            "assignment": None
            if rule.assignment is None
            else sigma_to_json(rule.assignment),
        }
    raise GroupFileError(f"unknown rule {rule!r}")


def rule_from_json(d):
    kind = d["kind"]
    if kind == "constant":
        return ConstantRule(element_from_json(d["value"]))
    if kind == "congruence-constant":
        return CongruenceConstantRule(element_from_json(d["value"]))
    if kind == "table":
        return TableRule(
            tuple(
                sorted(
                    (int(p), element_from_json(z)) for p, z in d["entries"].items()
                )
            ),
            None if d.get("extension") is None else element_from_json(d["extension"]),
        )
    if kind == "sigma":
        return SigmaRule(
            b_default=element_from_json(d["b_default"]),
            b_table=tuple(
                sorted(
                    (int(p), element_from_json(z)) for p, z in d.get("b_table", {}).items()
                )
            ),
            assignment=None
            if d.get("assignment") is None
            else sigma_from_json(d["assignment"]),
        )
    raise GroupFileError(f"unknown rule kind {kind}")


def family_to_json(f):
    if f.kind == "prime":
        return {
            "kind": "prime",
            "primes": prime_class_to_json(f.primes),
            "rule": rule_to_json(f.rule),
            "target": f.target,
            "exponent": f.exponent,
        }
    return {
        "kind": "completion",
        "schedule": list(f.schedule.generators),
        "offsets": [element_to_json(o) for o in f.offsets],
        "target": f.target,
    }


def family_from_json(d):
    if d["kind"] == "prime":
        return PrimeFamily(
            primes=prime_class_from_json(d["primes"]),
            rule=rule_from_json(d["rule"]),
            target=d["target"],
            exponent=d.get("exponent", 1),
        )
    return CompletionFamily(
        schedule=MultiplicativeSet(tuple(d["schedule"])),
        offsets=tuple(element_from_json(o) for o in d["offsets"]),
        target=d["target"],
    )


def completion_element_to_json(e):
    return {
        "seed": e.seed,
        "residues": [str(r) for r in e.residues],
    }


def completion_element_from_json(d, schedule):
    return CompletionElement(
        schedule, tuple(int(r) for r in d["residues"]), seed=d.get("seed")
    )


def ambient_to_json(a):
    if a is None:
        return None
    return {
        "schedule": list(a.schedule.generators),
        "mixes": {
            sym: {s: completion_element_to_json(e) for s, e in parts}
            for sym, parts in a.mixes
        },
    }


def ambient_from_json(d):
    if d is None:
        return None
    schedule = MultiplicativeSet(tuple(d["schedule"]))
    mixes = tuple(
        (
            sym,
            tuple(
                sorted(
                    (s, completion_element_from_json(e, schedule))
                    for s, e in parts.items()
                )
            ),
        )
        for sym, parts in sorted(d["mixes"].items())
    )
    return CompletionAmbient(schedule=schedule, mixes=mixes)


def presentation_to_json(G):
    comp = G.completion_families()
    return {
        "format": FORMAT_VERSION,
        "basis": list(G.basis.names),
        "roles": list(G.basis.roles),
        "heights": {s: height_sequence_to_json(h) for s, h in G.heights},
        "families": [family_to_json(f) for f in G.families],
        "purified": G.purified,
        "precision": comp[0].levels if comp else None,
        "seed": G.seed,
        "ambient": ambient_to_json(G.ambient),
    }


def presentation_from_json(d):
    try:
        basis = Basis(tuple(d["basis"]), tuple(d["roles"]))
        heights = {
            s: height_sequence_from_json(h) for s, h in d["heights"].items()
        }
        return GroupPresentation.of(
            basis,
            heights,
            [family_from_json(f) for f in d.get("families", [])],
            purified=d.get("purified", False),
            ambient=ambient_from_json(d.get("ambient")),
            seed=d.get("seed"),
        )
    except KeyError as exc:
        raise GroupFileError(f"missing group field {exc}") from exc


def hom_to_json(h):
    if h is None:
        return None
    return {
        "source": list(h.source_names),
        "target": list(h.target_names),
        "columns": {s: element_to_json(img) for s, img in h.columns},
        "provenance": h.provenance,
    }


def hom_from_json(d):
    if d is None:
        return None
    return Homomorphism.from_columns(
        tuple(d["source"]),
        tuple(d["target"]),
        {s: element_from_json(img) for s, img in d["columns"].items()},
        d.get("provenance", "symbolic-derivation"),
    )


def _param_to_json(v):
    if isinstance(v, SigmaAssignment):
        return {"__sigma__": sigma_to_json(v)}
    if isinstance(v, IndependenceVerdict):
        return {
            "__certificate__": {
                "kind": v.kind,
                "coeff_bound": v.coeff_bound,
                "level": v.level,
                "monomials": [list(m) for m in v.monomials],
                "witness": None if v.witness is None else [str(c) for c in v.witness],
            }
        }
    if isinstance(v, tuple):
        return list(v)
    return v


def _param_from_json(v):
    if isinstance(v, dict) and "__sigma__" in v:
        return sigma_from_json(v["__sigma__"])
    if isinstance(v, dict) and "__certificate__" in v:
        c = v["__certificate__"]
        return IndependenceVerdict(
            kind=c["kind"],
            coeff_bound=c["coeff_bound"],
            level=c["level"],
            monomials=tuple(tuple(m) for m in c["monomials"]),
            witness=None
            if c["witness"] is None
            else tuple(int(x) for x in c["witness"]),
        )
    if isinstance(v, list):
        return tuple(v)
    return v


def candidate_to_json(c):
    return {
        "format": FORMAT_VERSION,
        "construction": c.construction,
        "K": presentation_to_json(c.K),
        "G": presentation_to_json(c.G),
        "H": presentation_to_json(c.H),
        "pi": hom_to_json(c.pi),
        "section": hom_to_json(c.section),
        "kernel_projection": hom_to_json(c.kernel_projection),
        "params": {k: _param_to_json(v) for k, v in c.params},
    }


def candidate_from_json(d):
    try:
        return CellularCandidate(
            K=presentation_from_json(d["K"]),
            G=presentation_from_json(d["G"]),
            H=presentation_from_json(d["H"]),
            pi=hom_from_json(d["pi"]),
            construction=d["construction"],
            params=tuple(
                sorted((k, _param_from_json(v)) for k, v in d.get("params", {}).items())
            ),
            section=hom_from_json(d.get("section")),
            kernel_projection=hom_from_json(d.get("kernel_projection")),
        )
    except KeyError as exc:
        raise GroupFileError(f"missing bundle field {exc}") from exc


# ---------------------------------------------------------------------------
# verdict / report emission (write-only)

def trace_to_json(trace):
    return [
        {"rule": s.rule, "statement": s.statement, "data": _jsonable(s.data)}
        for s in trace
    ]


def _jsonable(v):
    if isinstance(v, Fraction):
        return _frac_str(v)
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float):
        return "inf" if v == INF else v
    return str(v)


def verdict_to_json(v):
    if v is None:
        return None
    return {
        "outcome": v.outcome,
        "trace": trace_to_json(v.trace),
        "generators": [hom_to_json(g) for g in v.generators],
        "scalar_module": None
        if v.scalar_module is None
        else height_sequence_to_json(v.scalar_module.heights),
        "bounds": _bounds_to_json(v.bounds),
        "certificates": [_param_to_json(c) for c in v.certificates],
    }


def _bounds_to_json(b):
    if b is None:
        return None
    return {
        "coeff_bound": b.coeff_bound,
        "prime_bound": b.prime_bound,
        "level": b.level,
        "den_exponent_cap": b.den_exponent_cap,
        "budget": b.budget,
    }


def invariance_to_json(v):
    return {
        "status": v.status,
        "trace": trace_to_json(v.trace),
        "witness": hom_to_json(v.witness) if v.witness is not None else None,
    }


def cellular_report_to_json(r):
    return {
        "format": FORMAT_VERSION,
        "overall": r.overall,
        "hom_G_to_K": verdict_to_json(r.hom_GK),
        "hom_K_to_H": verdict_to_json(r.hom_KH),
        "fully_invariant": invariance_to_json(r.fully_invariant),
        "hom_G_to_H": verdict_to_json(r.hom_GH),
        "kernel_identity": r.kernel_identity,
        "section": hom_to_json(r.section),
        "witness": _witness_to_json(r.witness),
        "bounds": _bounds_to_json(r.bounds),
    }


def _witness_to_json(w):
    if w is None:
        return None
    if isinstance(w, Homomorphism):
        return hom_to_json(w)
    return _jsonable(w)


def trail_to_json(trail):
    return [
        {
            "name": s.name,
            "text": s.text,
            "coeffs": {a: c for a, c in s.coeffs},
            "const": str(s.const),
            "modulus": s.modulus,
            "kind": s.kind,
            "derivation": [list(t) for t in s.derivation],
            "added": [str(x) for x in s.added],
        }
        for s in trail
    ]


def obstruction_report_to_json(r):
    return {
        "format": FORMAT_VERSION,
        "normalized": r.normalized,
        "case": r.case,
        "coordinate": r.coordinate,
        "witness": _jsonable(r.witness),
        "trail": trail_to_json(r.trail),
        "section": hom_to_json(r.section),
        "conclusion": r.conclusion,
        "note": r.note,
        "lift_action_table": list(r.lift_shape.action_table())
        if r.lift_shape is not None
        else None,
    }


def sweep_result_to_json(res):
    return {
        "format": FORMAT_VERSION,
        "value_bound": res.value_bound,
        "prime_bound": res.prime_bound,
        "rank1": {
            "total": res.rank1_total,
            "split": res.rank1_split,
            "congruence_refuted": res.rank1_congruence,
        },
        "rank2": {
            "total": res.rank2_total,
            "split": res.rank2_split,
            "congruence_refuted": res.rank2_congruence,
        },
        "cellular_found": res.cellular_found,
        "inconclusive_found": res.inconclusive_found,
        "all_witnesses_replayed": res.all_witnesses_replayed,
        "pair_samples_checked": res.pair_samples_checked,
        "kernel_impl": res.kernel_impl,
    }


# ---------------------------------------------------------------------------
# file helpers

def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def read_json_text(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise GroupFileError(f"invalid JSON at line {exc.lineno}") from exc


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise GroupFileError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise GroupFileError(f"{path}: invalid JSON at line {exc.lineno}") from exc


def load_presentation(path):
    return presentation_from_json(read_json(path))


def load_candidate(path):
    return candidate_from_json(read_json(path))


def load_group_or_candidate(path):
    d = read_json(path)
    if "G" in d and "pi" in d:
        return candidate_from_json(d)
    return presentation_from_json(d)
