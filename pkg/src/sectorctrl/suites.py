"""Property suites run by the command-line harness.

Every suite draws its randomness from ``prng_split(seed, stream_id)`` with a
stream id derived from the case number and trial index, so a report depends
only on the configuration. Results are grouped into cases; a case passes when
each of its trials does.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import channel as ch
from . import control as ct
from . import sectors as sc
from . import supermaps as sm
from .rng import Stream, prng_split
from .routedfmt import checker, fixtures
from .routedfmt.evaluator import evaluate
from .routedfmt.parser import parse, parse_file
from .tensor import EQ_TOL

CASE_STRIDE = 1_000_000


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    dims: tuple = ()
    trials: int | None = None     # None: the suite's own default
    seed: int = 0
    tol: float = EQ_TOL
    output: str | None = None
    path: str | None = None       # circuit file for the routed-* suites

    def __post_init__(self):
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    def to_obj(self) -> dict:
        return {"suite": self.suite, "dims": list(self.dims), "trials": self.trials,
                "seed": self.seed, "tol": self.tol, "output": self.output, "path": self.path}


@dataclass
class Case:
    name: str
    trials: int = 0
    failures: int = 0
    max_distance: float = 0.0
    detail: dict = field(default_factory=dict)
    values: list = field(default_factory=list, repr=False)
    first_failure: int | None = None

    @property
    def passed(self) -> bool:
        return self.trials > 0 and self.failures == 0

    def record(self, t: int, distance: float, ok: bool):
        self.trials += 1
        self.values.append(float(distance))
        self.max_distance = max(self.max_distance, float(distance))
        if not ok:
            self.failures += 1
            if self.first_failure is None:
                self.first_failure = t

    def to_obj(self) -> dict:
        return {"name": self.name, "passed": self.passed, "trials": self.trials,
                "failures": self.failures, "first_failure": self.first_failure,
                "max_distance": self.max_distance, "detail": self.detail}


@dataclass
class SuiteReport:
    config: SuiteConfig
    cases: list = field(default_factory=list)
    runtime: float = 0.0
    version: str = __version__

    @property
    def ok(self) -> bool:
        return bool(self.cases) and all(c.passed for c in self.cases)

    @property
    def n_failures(self) -> int:
        return sum(not c.passed for c in self.cases)

    @property
    def max_distance(self) -> float:
        return max((c.max_distance for c in self.cases), default=0.0)

    def case(self, name: str) -> Case:
        for c in self.cases:
            if c.name == name:
                return c
        c = Case(name)
        self.cases.append(c)
        return c

    def to_obj(self, include_runtime: bool = False) -> dict:
        # runtime is left out by default so equal configs give identical files
        obj = {"version": self.version, "config": self.config.to_obj(), "ok": self.ok,
               "failures": self.n_failures, "max_distance": self.max_distance,
               "cases": [c.to_obj() for c in self.cases]}
        if include_runtime:
            obj["runtime_s"] = self.runtime
        return obj

    def to_json(self, include_runtime: bool = False) -> str:
        return json.dumps(self.to_obj(include_runtime), indent=2, sort_keys=True) + "\n"


# -- random inputs -----------------------------------------------------------------

def unit_vector(rng: Stream, n: int) -> np.ndarray:
    v = rng.complex_normal(n)
    return v / np.linalg.norm(v)


def random_sector_preserving(rng: Stream, d_in: int, d_out: int, rank: int) -> sc.SectorPreserving1d:
    """Sector-preserving ``(1, d_in) -> (1, d_out)`` channel with random vacuum amplitudes."""
    c = ch.random_cptp(d_in, d_out, rank, rng.spawn(0))
    return sc.sector_preserving_from_amplitudes(unit_vector(rng.spawn(1), rank), c.kraus)


def jointly_valid_pins(c: ch.KrausChannel, m: int, rng: Stream) -> list:
    """``m`` pins taken as the leading operators of a randomly mixed Kraus list."""
    w = ch.random_isometry(m, len(c.kraus), rng)
    return [sum(np.conj(w[i, j]) * k for i, k in enumerate(c.kraus)) for j in range(m)]


def _stream(cfg: SuiteConfig, case_no: int, t: int) -> Stream:
    return prng_split(cfg.seed, case_no * CASE_STRIDE + t)


def _trials(cfg: SuiteConfig, default: int) -> int:
    return cfg.trials if cfg.trials is not None else default


def _dims(cfg: SuiteConfig, default: tuple) -> tuple:
    return cfg.dims or default


# -- suites ------------------------------------------------------------------------

def suite_ctrl_equiv(cfg: SuiteConfig, rep: SuiteReport):
    """CTRL on a sector-preserving channel versus the directly built pinned control."""
    n = _trials(cfg, 200)
    for i, d in enumerate(_dims(cfg, (2, 3, 4))):
        for rank in (1, 2, 3):
            case = rep.case(f"d={d} rank={rank}")
            for t in range(n):
                rng = _stream(cfg, 10 * i + rank, t)
                c = ch.random_cptp(d, d, rank, rng.spawn(0))
                alpha = unit_vector(rng.spawn(1), rank)
                out = sm.ctrl_apply(sc.sector_preserving_from_amplitudes(alpha, c.kraus))
                ref = ct.build_pinned_control(ch.canonicalize_pinned(c.kraus, alpha))
                dist = ch.choi_distance(out.channel, ref.channel)
                case.record(t, dist, dist <= cfg.tol)


def suite_ctrl_unitary(cfg: SuiteConfig, rep: SuiteReport):
    n = _trials(cfg, 100)
    for i, d in enumerate(_dims(cfg, (2, 3, 4))):
        case = rep.case(f"d={d}")
        ranks = set()
        for t in range(n):
            u = ch.random_unitary(d, _stream(cfg, i, t))
            out = sm.ctrl_apply(sc.sector_preserving_from_amplitudes([1.0], [u]))
            rank = ch.choi_rank(out.channel)
            ranks.add(rank)
            dist = ch.choi_distance(out.channel, ct.build_ctrl_unitary(u).channel)
            case.record(t, dist, dist <= cfg.tol and rank == 1)
        case.detail["choi_ranks"] = sorted(ranks)


def suite_roundtrip(cfg: SuiteConfig, rep: SuiteReport):
    n = _trials(cfg, 200)
    dims = _dims(cfg, (2, 3, 4))
    fwd = rep.case("inverse-after-ctrl")
    bwd = rep.case("ctrl-after-inverse")
    for t in range(n):
        d = dims[t % len(dims)]
        rng = _stream(cfg, 0, t)
        rank = rng.integers(1, 4)
        s = random_sector_preserving(rng.spawn(0), d, d, rank)
        back = sm.ctrl_inverse_apply(sm.ctrl_apply(s))
        dist = ch.choi_distance(back.channel, s.channel)
        fwd.record(t, dist, dist <= cfg.tol)

        rng = _stream(cfg, 1, t)
        c = ch.random_cptp(d, d, rank, rng.spawn(0))
        cc = ct.control_from_amplitudes(c.kraus, unit_vector(rng.spawn(1), rank))
        again = sm.ctrl_apply(sm.ctrl_inverse_apply(cc))
        dist = ch.choi_distance(again.channel, cc.channel)
        bwd.record(t, dist, dist <= cfg.tol)


def _remixed(p: ch.PinnedChannel, rng: Stream) -> ch.PinnedChannel:
    """Same channel and pin, different Kraus list for the rest."""
    rest = ch.remainder(p.channel, [p.pin])
    if rest is None:
        return p
    extra = rng.integers(0, 2)
    ks = list(rest.kraus) + [np.zeros_like(p.pin)] * extra
    u = ch.random_unitary(len(ks), rng)
    return ch.PinnedChannel(ch.channel([p.pin] + ch.mix_kraus(ks, u)), p.pin)


def suite_pin_control(cfg: SuiteConfig, rep: SuiteReport):
    """Pins as the complete invariant of standard control."""
    n = _trials(cfg, 300)
    dims = _dims(cfg, (2, 3, 4))
    fine = cfg.tol / 10
    names = ["canonicalization", "pin-equal", "coherence-block", "pin-distinct", "extract-rebuild"]
    cases = {k: rep.case(k) for k in names}
    for t in range(n):
        d = dims[t % len(dims)]
        rng = _stream(cfg, 0, t)
        rank = rng.integers(1, 4)
        c = ch.random_cptp(d, d, rank, rng.spawn(0))
        alpha = unit_vector(rng.spawn(1), rank)
        p = ch.canonicalize_pinned(c.kraus, alpha)
        cc = ct.build_pinned_control(p)

        dist = ch.choi_distance(ct.control_from_amplitudes(c.kraus, alpha).channel, cc.channel)
        cases["canonicalization"].record(t, dist, dist <= cfg.tol)

        other = ct.build_pinned_control(_remixed(p, rng.spawn(2)))
        dist = ch.choi_distance(other.channel, cc.channel)
        cases["pin-equal"].record(t, dist, dist <= cfg.tol)

        expect = np.outer(ch.kraus_vec(np.eye(d)), ch.kraus_vec(p.pin).conj())
        dist = np.linalg.norm(ct.coherence_block(cc) - expect)
        cases["coherence-block"].record(t, dist, dist <= fine)

        # a second pin of the same channel: the block difference is sqrt(d) |dP|
        q = ch.canonicalize_pinned(c.kraus, unit_vector(rng.spawn(3), rank))
        cq = ct.build_pinned_control(q)
        dp = np.linalg.norm(p.pin - q.pin)
        gap = np.linalg.norm(ct.coherence_block(cc) - ct.coherence_block(cq))
        dist = abs(gap - np.sqrt(d) * dp)
        separated = dp <= fine or ch.choi_distance(cc.channel, cq.channel) >= dp
        cases["pin-distinct"].record(t, dist, dist <= fine and separated)

        s = sc.build_sector_preserving_1d(p)
        back = sc.extract_pin(s)
        dist = max(np.linalg.norm(back.pin - p.pin),
                   ch.choi_distance(sc.build_sector_preserving_1d(back).channel, s.channel))
        cases["extract-rebuild"].record(t, dist, dist <= fine)


def suite_two_control(cfg: SuiteConfig, rep: SuiteReport):
    """Two-channel control is fixed by the Kraus prefix paired with a minimal list."""
    n = _trials(cfg, 100)
    dims = _dims(cfg, (2, 3))
    same = rep.case("equal-prefix")
    mutated = rep.case("mutated-prefix")
    indep = rep.case("independent-prefix")
    for t in range(n):
        d = dims[t % len(dims)]
        rng = _stream(cfg, 0, t)
        n_a = rng.integers(1, min(d, 2) + 1)
        n_b = n_a + rng.integers(1, 3)
        a_min = ch.minimal_kraus(ch.random_cptp(d, d, n_a, rng.spawn(0)))
        b = ch.random_cptp(d, d, n_b, rng.spawn(1))
        rep_b = ch.mix_kraus(b.kraus, ch.random_unitary(n_b, rng.spawn(2)))
        b1 = rep_b[:n_a]

        dist = ch.two_control_distance(a_min, b1, list(b1), b)
        same.record(t, dist, dist <= cfg.tol)

        theta = 0.05 + 0.45 * float(rng.uniform())
        lead = np.cos(theta) * rep_b[0] + np.sin(theta) * rep_b[n_a]
        b2 = [lead] + list(b1[1:])
        bump = np.linalg.norm(lead - rep_b[0])
        dist = ch.two_control_distance(a_min, b1, b2, b)
        ok = (not ch.two_control_equal_iff(a_min, b1, b2, b, cfg.tol)) and dist >= bump / 2
        mutated.record(t, bump / 2 / dist if dist > 0 else np.inf, ok)

        other = ch.mix_kraus(b.kraus, ch.random_unitary(n_b, rng.spawn(3)))[:n_a]
        dist = ch.two_control_distance(a_min, b1, other, b)
        diff = max(np.linalg.norm(x - y) for x, y in zip(b1, other))
        indep.record(t, diff, (dist > cfg.tol) == (diff > cfg.tol))
    mutated.detail["distance"] = "perturbation / (2 * Choi distance); must stay <= 1"
    indep.detail["distance"] = "largest prefix difference"


def suite_two_ctrl_isometry(cfg: SuiteConfig, rep: SuiteReport):
    n = _trials(cfg, 100)
    pairs = [(di, do) for di in (2, 3) for do in (2, 3, 4) if do >= di]
    if cfg.dims:
        pairs = [(di, do) for di, do in pairs if di in cfg.dims and do in cfg.dims]
    for t in range(n):
        di, do = pairs[t % len(pairs)]
        rng = _stream(cfg, 0, t)
        u = ch.random_isometry(di, do, rng.spawn(0))
        v = ch.random_isometry(di, do, rng.spawn(1))
        a = sc.sector_preserving_from_amplitudes([1.0], [u])
        b = sc.sector_preserving_from_amplitudes([1.0], [v])
        dist = ch.choi_distance(sm.two_ctrl_apply(a, b).channel, ct.build_ctrl_two_unitary(u, v).channel)
        rep.case(f"d_in={di} d_out={do}").record(t, dist, dist <= cfg.tol)


def suite_depol_obstruction(cfg: SuiteConfig, rep: SuiteReport):
    """Two-channel control cannot reach I ⊗ dephasing; an environment output can."""
    n = _trials(cfg, 100)
    dims = _dims(cfg, (2, 3))

    case = rep.case("2-ctrl-block-rank-1")
    for t in range(n):
        d = dims[t % len(dims)]
        rng = _stream(cfg, 0, t)
        a = random_sector_preserving(rng.spawn(0), d, d, rng.integers(1, 4))
        b = random_sector_preserving(rng.spawn(1), d, d, rng.integers(1, 4))
        sv = ct.singular_values(ct.coherence_block(sm.two_ctrl_apply(a, b)))
        ratio = sv[1] / sv[0] if sv[0] > 0 else 0.0
        case.record(t, ratio, ratio <= 1e-9)
    case.detail["distance"] = "second / first singular value of the coherence block"

    deph = ch.dephasing_qubit()
    target = ct.ControlledChannel(2, 2, 2, ch.tensor(ch.identity_channel(2), deph))
    sv = ct.singular_values(ct.coherence_block(target))
    case = rep.case("dephasing-block-rank-2")
    case.record(0, float(sv[1]), sv[1] >= 0.4)
    case.detail["singular_values"] = [round(float(x), 12) for x in sv]

    pur = sm.purification_input(deph.kraus)
    out = sm.two_ctrl_e_apply(pur, pur, 2)
    dist = ch.choi_distance(out.channel, target.channel)
    case = rep.case("env-output-reaches-dephasing")
    case.record(0, dist, dist <= cfg.tol)
    case.detail["block_rank"] = sm.coherence_rank(out)

    case = rep.case("env-block-rank-bound")
    seen = {}
    for t in range(n):
        d = dims[t % len(dims)]
        rng = _stream(cfg, 1, t)
        d_env = 1 + t % 3
        a = random_sector_preserving(rng.spawn(0), d, d * d_env, rng.integers(1, 4))
        b = random_sector_preserving(rng.spawn(1), d, d * d_env, rng.integers(1, 4))
        r = sm.coherence_rank(sm.two_ctrl_e_apply(a, b, d_env))
        seen[d_env] = max(seen.get(d_env, 0), r)
        case.record(t, r - d_env, r <= d_env)
    case.detail["max_rank_by_d_env"] = {str(k): v for k, v in sorted(seen.items())}
    case.detail["distance"] = "rank minus d_E"


def _random_gammas(rng: Stream, m: int, top: float = 0.95) -> np.ndarray:
    g = np.zeros((m, m), dtype=complex)
    for k in range(1, m):
        g[:k, k] = unit_vector(rng.spawn(k), k) * top * float(rng.uniform())
    return g


def _params_gap(a: ct.CompositeControlParams, b: ct.CompositeControlParams) -> float:
    gaps = [np.linalg.norm(a.gammas - b.gammas)]
    gaps += [np.linalg.norm(x - y) for i, (x, y) in enumerate(zip(a.pins, b.pins))
             if i not in b.undetermined]
    return float(max(gaps))


def suite_composite(cfg: SuiteConfig, rep: SuiteReport):
    n = _trials(cfg, 100)
    dims = _dims(cfg, (2, 3))
    mags = (0.0, 0.3, 0.99)

    case = rep.case("m=2 build-extract")
    for t in range(n):
        d = dims[t % len(dims)]
        rng = _stream(cfg, 0, t)
        c = ch.random_cptp(d, d, rng.integers(2, 4), rng.spawn(0))
        pins = jointly_valid_pins(c, 2, rng.spawn(1))
        g = ct.gammas_from_pairs(2, {(1, 2): mags[t % 3] * np.exp(2j * np.pi * rng.uniform())})
        params = ct.CompositeControlParams(pins, g)
        cc = ct.build_composite_control(c, params)
        inner, got = ct.extract_composite_params(cc, 2)
        dist = max(_params_gap(params, got),
                   ch.choi_distance(ct.build_composite_control(inner, got).channel, cc.channel))
        case.record(t, dist, dist <= cfg.tol)

    case = rep.case("m=2 circuit-vs-direct")
    for t in range(n):
        d = dims[t % len(dims)]
        rng = _stream(cfg, 1, t)
        c = ch.random_cptp(d, d, rng.integers(2, 4), rng.spawn(0))
        p1, p2 = jointly_valid_pins(c, 2, rng.spawn(1))
        gam = (mags + (1.0,))[t % 4] * np.exp(2j * np.pi * rng.uniform())
        out = sm.ctrl2_apply(sc.build_sector_preserving_d11(c, p1, p2, gam))
        ref = ct.build_composite_control(c, ct.CompositeControlParams(
            [p1, p2], ct.gammas_from_pairs(2, {(1, 2): gam})))
        dist = ch.choi_distance(out.channel, ref.channel)
        case.record(t, dist, dist <= cfg.tol)

    case = rep.case("m=3 tp-and-extract")
    for t in range(n):
        d = dims[t % len(dims)]
        rng = _stream(cfg, 2, t)
        c = ch.random_cptp(d, d, rng.integers(3, 5), rng.spawn(0))
        params = ct.CompositeControlParams(jointly_valid_pins(c, 3, rng.spawn(1)),
                                           _random_gammas(rng.spawn(2), 3))
        cc = ct.build_composite_control(c, params)
        inner, got = ct.extract_composite_params(cc, 3)
        dist = max(cc.channel.tp_defect(), _params_gap(params, got),
                   ch.choi_distance(ct.build_composite_control(inner, got).channel, cc.channel))
        case.record(t, dist, dist <= cfg.tol)


# -- routed circuits ---------------------------------------------------------------

def density_leaks(c: ch.CPMap, space_in, space_out, route: sc.Route, tol: float = EQ_TOL) -> set:
    """Forbidden ``(k, l)`` pairs hit by some basis state of sector ``k``.

    Independent of the projector test used by the checker: it pushes each
    input basis state through the channel and weighs the output sectors.
    """
    space_in, space_out = sc.as_space(space_in), sc.as_space(space_out)
    found = set()
    for k in range(space_in.n_sectors):
        for i in space_in.indices(k):
            rho = np.zeros((space_in.dim, space_in.dim), dtype=complex)
            rho[i, i] = 1.0
            out = c.apply(rho)
            for l in range(space_out.n_sectors):
                if route.allows(k, l):
                    continue
                idx = space_out.indices(l)
                if np.real(np.trace(out[np.ix_(idx, idx)])) > tol ** 2:
                    found.add((k, l))
    return found


def expected_violations(ast, payloads=None, tol: float = EQ_TOL) -> set:
    """Oracle for the checker: ``(node, kind, in_sector, out_sector)`` per gate defect."""
    out = set()
    for g in ast.gates:
        sin, sout = checker.wires_space(ast, g.ins), checker.wires_space(ast, g.outs)
        try:
            route = checker.node_route(ast, g)
        except checker.RouteShapeError:
            out.add((g.name, "shape", None, None))
            continue
        c = checker.load_payload(ast, g.payload, payloads)
        for k, l in density_leaks(c, sin, sout, route, tol):
            out.add((g.name, "leak", sin.sector_tuple(k), sout.sector_tuple(l)))
    return out


def _found_violations(report) -> set:
    return {(v.node, v.kind, v.in_sector, v.out_sector) for v in report.violations
            if v.kind in ("shape", "leak")}


def random_bindings(ast, rng: Stream) -> dict:
    out = {}
    for i, s in enumerate(ast.slots):
        sin, sout = checker.wires_space(ast, s.ins), checker.wires_space(ast, s.outs)
        out[s.name] = sc.random_route_follower(sin, sout, checker.node_route(ast, s), rng.spawn(i))
    return out


def suite_two_ctrl_circuit(cfg: SuiteConfig, rep: SuiteReport):
    """The shipped two-channel-control circuit and its twenty broken variants."""
    n = _trials(cfg, 100)
    path = cfg.path or fixtures.shipped_circuit_path()
    ast = parse_file(path)
    d = ast.wire("Tin").sectors[0]
    case = rep.case("eval-vs-2-ctrl")
    for t in range(n):
        rng = _stream(cfg, 0, t)
        a = random_sector_preserving(rng.spawn(0), d, d, rng.integers(1, 4))
        b = random_sector_preserving(rng.spawn(1), d, d, rng.integers(1, 4))
        got = evaluate(ast, {"A": a, "B": b})
        dist = ch.choi_distance(got, sm.two_ctrl_apply(a, b).channel)
        case.record(t, dist, dist <= cfg.tol)
    report = checker.check(ast)
    case = rep.case("fixture-checks")
    case.record(0, 0.0, report.ok)
    case.detail["composed_route"] = None if report.composed is None else report.composed.astype(int).tolist()

    for t, mut in enumerate(fixtures.mutations(d)):
        m_ast = parse(mut.text)
        want = expected_violations(m_ast, mut.payloads)
        got = _found_violations(checker.check(m_ast, mut.payloads))
        case = rep.case(f"mutation {mut.name}")
        case.record(t, float(len(want ^ got)), bool(want) and want == got)
        case.detail["violations"] = sorted(_fmt_violation(v) for v in got)


def _fmt_violation(v) -> str:
    node, kind, k, l = v
    return f"{node}:{kind}" if k is None else f"{node}:{kind}:{k}->{l}"


def suite_routed_check(cfg: SuiteConfig, rep: SuiteReport):
    if not cfg.path:
        raise ValueError("routed-check needs a circuit file")
    ast = parse_file(cfg.path)
    report = checker.check(ast)
    for name, status in report.status.items():
        rep.case(f"node {name}").record(0, 0.0, status == "ok")
    case = rep.case("circuit")
    case.record(0, max((v.norm for v in report.violations), default=0.0), report.ok)
    case.detail = report.to_obj()


def suite_routed_eval(cfg: SuiteConfig, rep: SuiteReport):
    """Evaluate a circuit on random route-following bindings; the result must be a channel
    that follows the declared output route."""
    if not cfg.path:
        raise ValueError("routed-eval needs a circuit file")
    ast = parse_file(cfg.path)
    report = checker.check(ast)
    if not report.ok:
        case = rep.case("check")
        case.record(0, 0.0, False)
        case.detail = report.to_obj()
        return
    sin = checker.wires_space(ast, ast.inputs)
    sout = checker.wires_space(ast, ast.outputs)
    route = sc.Route(checker.eval_route(ast.output_route, ast, sout.n_sectors, sin.n_sectors))
    case = rep.case("output-route")
    for t in range(_trials(cfg, 20)):
        got = evaluate(ast, random_bindings(ast, _stream(cfg, 0, t)))
        dist = max(got.tp_defect(), sc.max_leakage(got, sin, sout, route))
        case.record(t, dist, dist <= cfg.tol)


def suite_verify_supermap(cfg: SuiteConfig, rep: SuiteReport):
    n = _trials(cfg, 50)
    aux = _dims(cfg, (1, 2, 3))
    sups = [sm.ctrl_supermap(), sm.two_ctrl_supermap(), sm.ctrl2_supermap()]
    for i, sup in enumerate(sups):
        r = sm.verify_routed_supermap(sup, aux, n, prng_split(cfg.seed, i), cfg.tol)
        case = rep.case(sup.name)
        case.trials = r["trials"]
        case.failures = r["trials"] - r["passes"]
        case.max_distance = max(r["worst_leakage"], r["worst_tp_defect"])
        case.values = [case.max_distance]
        case.first_failure = r["failures"][0]["trial"] if r["failures"] else None
    broken = sm.broken_ctrl_supermap()
    r = sm.verify_routed_supermap(broken, aux, n, prng_split(cfg.seed, len(sups)), cfg.tol)
    case = rep.case("CTRL-broken rejected")
    case.record(0, r["worst_leakage"], r["passes"] < r["trials"])
    case.detail = {"trials": r["trials"], "failing_trials": r["trials"] - r["passes"]}


SUITES = {
    "ctrl-equiv": suite_ctrl_equiv,
    "ctrl-unitary": suite_ctrl_unitary,
    "roundtrip": suite_roundtrip,
    "lemma2": suite_pin_control,
    "thm2-twocontrol": suite_two_control,
    "two-ctrl-isometry": suite_two_ctrl_isometry,
    "depol-obstruction": suite_depol_obstruction,
    "composite": suite_composite,
    "two-ctrl-circuit": suite_two_ctrl_circuit,
    "routed-check": suite_routed_check,
    "routed-eval": suite_routed_eval,
    "verify-supermap": suite_verify_supermap,
}


def run_suite(cfg: SuiteConfig) -> SuiteReport:
    """Run ``cfg.suite``; writes the JSON report to ``cfg.output`` when set."""
    if cfg.suite not in SUITES:
        raise KeyError(f"unknown suite {cfg.suite!r}; choose from {', '.join(SUITES)}")
    rep = SuiteReport(cfg)
    start = time.perf_counter()
    SUITES[cfg.suite](cfg, rep)
    rep.runtime = time.perf_counter() - start
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(rep.to_json())
    return rep
