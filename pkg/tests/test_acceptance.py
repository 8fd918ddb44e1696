"""Acceptance criteria, one test per criterion, each under its time budget."""

import filecmp
import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import cos23, cos23_prime, derivative_roots, direct_scan, interval_search
from retroprospect.cli import main
from retroprospect.dynamics import (
    box_tube,
    build_regulation_map,
    constant_map,
    decay_map,
    euler_step,
    history_map,
    minmax_entry_constraint,
    nonpositive_cone,
    simulate,
)
from retroprospect.epihypo import (
    FUNCTIONS,
    FermatVerdict,
    Schedule,
    estimate_directional,
    fermat_check,
)
from retroprospect.evolution import Evolution
from retroprospect.kernel import compute_kernel
from retroprospect.tensor import ConnectionTensor, normalized, outer
from retroprospect.trendometer import Kind, bear_bull_proportions, detect_reversals

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


@pytest.mark.criterion(1, "reversal detection equals direct scan on 1000 random series (<5 s)")
def test_reversal_oracle_equivalence():
    rng = np.random.default_rng(20240101)
    with Timer() as timer:
        for _ in range(1000):
            n = int(rng.integers(100, 1001))
            steps = rng.normal(size=n - 1)
            steps[steps == 0] = 1.0
            x = np.concatenate([[0.0], np.cumsum(steps)]).tolist()
            assert all(a != b for a, b in zip(x, x[1:]))
            found = [ev.index for ev in detect_reversals(Evolution.uniform(x))]
            assert found == direct_scan(x)
    assert timer.elapsed < 5.0


@pytest.mark.criterion(2, "1-cos(2t)cos(3t) extrema within one step of f' roots, alternating (<1 s)")
def test_analytic_extremum():
    h = 1e-3
    with Timer() as timer:
        e = Evolution.from_function(cos23, 0.0, 2 * np.pi, h)
        events = detect_reversals(e)
    roots = derivative_roots(cos23_prime, 0.0, e.times[-1])
    assert len(events) == len(roots)
    assert np.all(np.abs(np.array([ev.time for ev in events]) - roots) <= h)
    kinds = [ev.kind for ev in events]
    assert all(a is not b for a, b in zip(kinds, kinds[1:]))
    assert timer.elapsed < 1.0


@pytest.mark.criterion(3, "tensor algebra on 10000 random pairs (<5 s)")
def test_tensor_algebra():
    rng = np.random.default_rng(7)
    with Timer() as timer:
        for _ in range(10_000):
            dim = int(rng.integers(1, 7))
            p, p2, q = rng.normal(size=(3, dim)) * rng.uniform(0.1, 100)
            alpha = rng.normal() * 10
            t = ConnectionTensor(p, q)
            for i, j in itertools.product(range(dim), repeat=2):
                assert t.entries[i, j] == p[i] * q[j]
            base = outer(p, q)
            scale = np.abs(base).max()
            assert np.abs(outer(alpha * p, q) - alpha * base).max() <= 1e-12 * abs(alpha) * scale
            assert np.abs(outer(p, alpha * q) - alpha * base).max() <= 1e-12 * abs(alpha) * scale
            other = outer(p2, q)
            bound = 1e-12 * (scale + np.abs(other).max())
            assert np.abs(outer(p + p2, q) - (base + other)).max() <= bound
            s = np.linalg.svd(base, compute_uv=False)
            assert np.all(s[1:] <= 1e-10 * s[0])
            assert abs(np.linalg.norm(normalized(t)) - 1.0) <= 1e-12
    assert timer.elapsed < 5.0


@pytest.mark.criterion(4, "Euler order one on decay, bit-exact history continuation (<1 s)")
def test_euler_convergence():
    with Timer() as timer:
        errors = []
        for h in (0.02, 0.01, 0.005):
            traj = simulate(decay_map(), 0.0, 1.0, 0.0, h, round(1 / h))
            errors.append(abs(traj.states[-1, 0] - math.exp(-1.0)))
        ratios = [a / b for a, b in zip(errors, errors[1:])]
        for v0, h, steps in [(2.0, 0.125, 64), (-0.75, 1 / 64, 256), (3.0, 2**-10, 1024)]:
            traj = simulate(history_map(), 0.0, 0.0, v0, h, steps)
            assert np.array_equal(traj.states[:, 0], v0 * traj.times)
    assert all(1.7 <= r <= 2.3 for r in ratios), ratios
    assert timer.elapsed < 1.0


def brute_accepts(kind, b, w, sample, tol=1e-12):
    dim = len(b)
    if kind == "nonpositive":
        return all(b[i] * w[j] <= 0 for i in range(dim) for j in range(dim))
    for i, j in itertools.product(range(dim), repeat=2):
        values = [b[i] * u[j] for u in sample]
        if kind == "minimize" and b[i] * w[j] > min(values) + tol:
            return False
        if kind == "maximize" and b[i] * w[j] < max(values) - tol:
            return False
    return True


@pytest.mark.criterion(5, "regulation map sound and equal to brute-force filtering, 100 triples (<2 s)")
def test_regulation_soundness():
    rng = np.random.default_rng(11)
    kinds = ["nonpositive", "minimize", "maximize"]
    with Timer() as timer:
        for k in range(100):
            dim = int(rng.integers(1, 4))
            sample = [rng.integers(-3, 4, size=dim) / 2 for _ in range(int(rng.integers(1, 9)))]
            b = rng.integers(-2, 3, size=dim) / 2
            kind = kinds[k % 3]
            F = constant_map(*sample)
            C = nonpositive_cone() if kind == "nonpositive" else minmax_entry_constraint(F, kind)
            G = build_regulation_map(F, C)
            emitted = G(0.0, np.zeros(dim), b)
            for w in emitted:
                assert C(0.0, np.zeros(dim), ConnectionTensor(b, w))
            expected = [w for w in sample if brute_accepts(kind, b, w, sample)]
            assert [w.tolist() for w in emitted] == [w.tolist() for w in expected]
            # post-hoc check along a trajectory, until the regulation map runs dry
            x, prev = np.zeros(dim), b
            for j in range(5):
                if not G(0.25 * j, x, prev):
                    break
                x, chosen = euler_step(G, 0.25 * j, x, prev, 0.25)
                assert brute_accepts(kind, prev, chosen, sample)
                prev = chosen
    assert timer.elapsed < 2.0


@pytest.mark.criterion(6, "kernel equals exhaustive search on both 1-D examples, monotone in tube and horizon (<30 s)")
def test_kernel_oracle_equivalence():
    variations = [(0.05, 0.5, 10), (0.1, 0.5, 6), (0.025, 0.25, 8)]
    with Timer() as timer:
        for velocities in ((-1.0, 0.0, 1.0), (1.0,)):
            for dx, dv, horizon in variations:
                G = constant_map(*velocities)
                grid = compute_kernel(G, box_tube(0, 1), 0, 1, dx, -1, 1, dv, 0.1, horizon)
                assert grid.total_nodes <= 10_000
                search = interval_search(velocities, dx=dx, dv=dv, horizon=horizon).table()
                assert np.array_equal(grid.viable, search)

                inner = compute_kernel(G, box_tube(0.2, 0.8), 0, 1, dx, -1, 1, dv, 0.1, horizon)
                assert np.all(grid.viable[inner.viable])

                longer = compute_kernel(G, box_tube(0, 1), 0, 1, dx, -1, 1, dv, 0.1, horizon + 3)
                assert np.all(grid.viable[0][longer.viable[0]])
        free = compute_kernel(constant_map(-1.0, 0.0, 1.0), box_tube(0, 1), 0, 1, 0.05, -1, 1, 0.5, 0.1, 10)
        drift = compute_kernel(constant_map(1.0), box_tube(0, 1), 0, 1, 0.05, -1, 1, 0.5, 0.1, 10)
    assert len(free.viable_states(0)) == 21
    assert drift.viable_states(0).tolist() == [[0.0]]
    assert timer.elapsed < 30.0


@pytest.mark.criterion(7, "epi/hypo duality, one-sided values of |x|, Fermat rule (<1 s)")
def test_epi_hypo_identities():
    functions = [FUNCTIONS["abs"], FUNCTIONS["square"], lambda x: 3 * float(x) ** 2 - float(x) + 2,
                 FUNCTIONS["xsin"]]
    probes = [0.0, 0.3, -1.2, 1e-3]
    with Timer() as timer:
        for V, x, u in itertools.product(functions, probes, (1.0, -1.0, 0.5)):
            for schedule in (Schedule(), Schedule(0.1, 0.5, 20)):
                d = estimate_directional(V, x, u, u, schedule)
                m = estimate_directional(V, x, -u, -u, schedule)
                assert abs(d.epi_backward + m.hypo_forward) <= 1e-9
                assert abs(d.hypo_backward + m.epi_forward) <= 1e-9
        a = estimate_directional(FUNCTIONS["abs"], 0.0, 1.0, 1.0)
        verdict = fermat_check(FUNCTIONS["square"], 0.0)
    assert (a.epi_forward, a.hypo_forward) == (1.0, 1.0)
    assert (a.epi_backward, a.hypo_backward) == (-1.0, -1.0)
    assert verdict is FermatVerdict.CONSISTENT_WITH_MIN
    assert timer.elapsed < 1.0


@pytest.mark.criterion(8, "sine bear/bull shares near 1/2, affine maps scale jerkiness by alpha^2 (<1 s)")
def test_symmetry_statistics():
    rng = np.random.default_rng(3)
    with Timer() as timer:
        e = Evolution.from_function(np.sin, 0.0, 20 * np.pi, 1e-3)
        events = detect_reversals(e)
        bear, bull = bear_bull_proportions(events)
        # unit-scale random walks; see the ledger for why the sine samples are not used here
        for alpha, beta in [(2.0, 5.0), (0.01, -3.0), (37.5, 100.0), (math.pi, math.e)]:
            x = np.cumsum(rng.normal(size=1000))
            base = detect_reversals(Evolution.uniform(x))
            mapped = detect_reversals(Evolution.uniform(alpha * x + beta))
            assert [(m.index, m.kind) for m in mapped] == [(ev.index, ev.kind) for ev in base]
            for ev, m in zip(base, mapped):
                assert abs(m.jerkiness - alpha**2 * ev.jerkiness) <= 1e-9 * alpha**2 * ev.jerkiness
    assert abs(bear - 0.5) <= 0.02 and abs(bull - 0.5) <= 0.02
    assert {ev.kind for ev in events} == {Kind.BEAR, Kind.BULL}
    assert timer.elapsed < 1.0


def run_outputs(directory):
    directory.mkdir()
    prices = str(FIXTURES / "prices.csv")
    commands = [
        ["analyze", prices, "--column", "a", "--out", str(directory / "prices_a")],
        ["matrix", prices, "--columns", "a,b,c", "--all-dates", "--out", str(directory / "prices_matrix.csv")],
        ["matrix", prices, "--columns", "a,b,c", "--all-dates", "--mode", "qualitative",
         "--out", str(directory / "prices_matrix_qualitative.csv")],
        ["matrix", prices, "--columns", "a,b,c", "--date", "2024-01-02", "--normalized",
         "--out", str(directory / "prices_matrix_normalized.csv")],
    ]
    return [main(argv) for argv in commands]


@pytest.mark.criterion(9, "CLI outputs byte-identical across runs and to golden files; exit codes (<1 s)")
def test_cli_round_trip(tmp_path):
    with Timer() as timer:
        assert run_outputs(tmp_path / "first") == [0, 0, 0, 0]
        assert run_outputs(tmp_path / "second") == [0, 0, 0, 0]
        names = sorted(p.name for p in GOLDEN.iterdir())
        assert sorted(p.name for p in (tmp_path / "first").iterdir()) == names
        for name in names:
            first = (tmp_path / "first" / name).read_bytes()
            assert first == (tmp_path / "second" / name).read_bytes()
            assert first == (GOLDEN / name).read_bytes(), name
        assert filecmp.cmp(tmp_path / "first" / "prices_a_stats.txt", GOLDEN / "prices_a_stats.txt",
                           shallow=False)
        bad = tmp_path / "bad"
        assert main(["analyze", str(FIXTURES / "ragged.csv"), "--column", "close", "--out", str(bad)]) == 1
        assert main(["analyze", str(FIXTURES / "blank_cell.csv"), "--column", "close", "--out", str(bad)]) == 1
        assert main(["analyze", str(FIXTURES / "unsorted.csv"), "--column", "close", "--out", str(bad)]) == 1
        assert main(["analyze", str(tmp_path / "absent.csv"), "--column", "close", "--out", str(bad)]) == 2
    assert timer.elapsed < 1.0
