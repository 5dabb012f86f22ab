"""Acceptance gate: one check per criterion, at the shipped configuration.

The full suite registry is executed once against the packaged default
configuration; each criterion then audits its slice of the rows (values,
tolerances, replicate ranges, runtime) and prints a PASS/FAIL line.
Determinism is exercised through the command line interface proper.
"""

import re
from collections import defaultdict

import pytest

from poisson_chaos.cli import main
from poisson_chaos.config import load_config
from poisson_chaos.suites import run_suite, suite_names


@pytest.fixture(scope="module")
def default_rows():
    config = load_config()
    rows = []
    for name in suite_names():
        rows.extend(run_suite(name, config))
    return rows


def _select(rows, suite=None, pattern=None):
    out = []
    for row in rows:
        if suite and row.suite != suite:
            continue
        if pattern and not re.match(pattern, row.case_id):
            continue
        out.append(row)
    return out


def _report(name, rows, extra=""):
    failures = [r for r in rows if r.verdict != "PASS"]
    status = "PASS" if not failures else "FAIL"
    wall = sum(r.wall_time_ms for r in rows) / 1000.0
    print(f"[{status}] {name}: {len(rows) - len(failures)}/{len(rows)} cases, "
          f"{wall:.1f}s{extra}")
    assert rows, f"{name}: no cases selected"
    assert not failures, f"{name}: {[(r.suite, r.case_id) for r in failures]}"
    return wall


class TestAcceptance:
    def test_criterion_1_pathwise_exact_identities(self, default_rows):
        """Exhaustive pattern scans of the exact pathwise identities."""
        rows = []
        finite_sum = _select(default_rows, "chaos_reconstruction", r"finite_sum_")
        assert {r.case_id for r in finite_sum} == {
            "finite_sum_S1", "finite_sum_S2", "finite_sum_S3"}
        assert all(r.tolerance == 1e-10 for r in finite_sum)
        rows += finite_sum

        products = _select(default_rows, "product_formula")
        pairs = {tuple(map(int, re.findall(r"p(\d)_q(\d)", r.case_id)[0]))
                 for r in products}
        assert {(1, 1), (2, 1), (1, 2), (2, 2)} <= pairs
        assert all(r.tolerance == 1e-9 for r in products)
        rows += products

        sym = _select(default_rows, "wi_isometry", r"symmetrization_")
        assert sym and all(r.tolerance == 1e-10 for r in sym)
        rows += sym

        chaos_cancel = _select(default_rows, "ou_operators", r"integral_of_derivative_")
        assert chaos_cancel and all(r.tolerance == 1e-12 for r in chaos_cancel)
        rows += chaos_cancel

        wall = _report("criterion 1 (pathwise exact identities)", rows)
        assert wall < 30.0

    def test_criterion_2_oracle_identities(self, default_rows):
        """Enumerated identities at certified truncation tails."""
        rows = []
        fock = _select(default_rows, "fock_isometry", r"series_vs_oracle_")
        assert len(fock) >= 10
        assert all(r.tolerance == 1e-6 for r in fock)
        rows += fock
        rows += _select(default_rows, "fock_isometry", r"series_vs_closed_")

        wi = _select(default_rows, "wi_isometry", r"oracle_")
        assert len(wi) >= 4 and all(r.tolerance == 1e-6 for r in wi)
        rows += wi

        duality = _select(default_rows, "duality")
        assert duality and all(r.tolerance == 1e-6 for r in duality)
        rows += duality

        skorohod = _select(default_rows, "skorohod_isometry", r"second_moment_")
        assert skorohod and all(r.tolerance == 1e-6 for r in skorohod)
        rows += skorohod

        mean_rows = _select(default_rows, "mehler", r"mean_preservation_")
        assert mean_rows and all(r.tolerance == 1e-8 for r in mean_rows)
        rows += mean_rows
        contract = _select(default_rows, "mehler", r"contractivity_")
        assert contract and all(r.tolerance == 1e-9 for r in contract)
        rows += contract

        mean_square = _select(default_rows, "ou_operators", r"mean_square_")
        assert mean_square and all(r.tolerance == 1e-6 for r in mean_square)
        rows += mean_square

        wall = _report("criterion 2 (oracle identities)", rows)
        assert wall < 60.0

    def test_criterion_3_monte_carlo_identities(self, default_rows):
        """Sampled identities at 1e5 to 1e6 replicates, fixed seeds."""
        rows = []
        rows += _select(default_rows, "laplace")
        rows += _select(default_rows, "mecke")
        rows += _select(default_rows, "factorial_moments")
        rows += _select(default_rows, "wi_isometry", r"mean_zero_")
        rows += _select(default_rows, "mehler", r"thinning_mc_")
        rows += _select(default_rows, "mehler", r"inverse_quadrature_")
        rows += _select(default_rows, "covariance")
        for row in rows:
            assert 100_000 <= row.replicates <= 1_000_000, (row.suite, row.case_id)
        anchors = [r for r in rows if r.case_id.startswith("linear_anchor")]
        assert len(anchors) == 2
        for row in anchors:
            assert abs(row.lhs - 1.0) < 1e-6 and abs(row.rhs - 1.0) < 1e-6
        wall = _report("criterion 3 (Monte Carlo identities)", rows)
        assert wall < 300.0

    def test_criterion_4_inequalities(self, default_rows):
        """Variance bound, its second-moment extension, and association."""
        poincare = _select(default_rows, "poincare", r"variance_bound_")
        assert len(poincare) >= 10
        equality = _select(default_rows, "poincare", r"equality_linear_S1")
        assert equality and equality[0].tolerance == 1e-9
        extension = _select(default_rows, "poincare", r"l1_extension_")
        assert extension
        fkg = _select(default_rows, "fkg")
        assert len(fkg) >= 5
        _report("criterion 4 (inequalities)",
                poincare + equality + extension + fkg)

    def test_criterion_5_determinism(self, tmp_path, monkeypatch, capsys):
        """Byte-identical reports across reruns and worker counts."""
        args = ["all", "--seed", "404", "--replicates", "20000"]
        paths = [tmp_path / f"run{i}.csv" for i in range(4)]
        codes = []
        monkeypatch.setenv("POISSON_CHAOS_THREADS", "1")
        codes.append(main(args + ["--report", str(paths[0])]))
        codes.append(main(args + ["--report", str(paths[1])]))
        monkeypatch.setenv("POISSON_CHAOS_THREADS", "3")
        codes.append(main(args + ["--report", str(paths[2])]))
        monkeypatch.setenv("POISSON_CHAOS_THREADS", "4")
        codes.append(main(args + ["--report", str(paths[3])]))
        capsys.readouterr()
        assert codes == [0, 0, 0, 0]
        blobs = [p.read_bytes() for p in paths]
        identical_rerun = blobs[0] == blobs[1]
        identical_threads = blobs[0] == blobs[2] == blobs[3]
        status = "PASS" if identical_rerun and identical_threads else "FAIL"
        print(f"[{status}] criterion 5 (determinism): rerun identical="
              f"{identical_rerun}, thread-count independent={identical_threads}")
        assert identical_rerun and identical_threads

    def test_criterion_5_full_default_run_passes(self, default_rows):
        """Every case of the shipped default configuration passes."""
        by_suite = defaultdict(list)
        for row in default_rows:
            by_suite[row.suite].append(row)
        assert set(by_suite) == set(suite_names())
        _report("criterion 5 (default configuration green)", default_rows)

    def test_criterion_6_uniqueness_and_convergence(self, default_rows):
        """Coefficient recovery and monotone truncation error."""
        unique = _select(default_rows, "chaos_reconstruction", r"uniqueness_")
        assert len(unique) >= 3
        assert all(r.tolerance == 1e-8 for r in unique)
        monotone = _select(default_rows, "chaos_reconstruction", r"l2_monotone_")
        assert len(monotone) >= 8
        terminal = _select(default_rows, "chaos_reconstruction", r"l2_terminal_")
        assert terminal and all(r.tolerance == 1e-6 for r in terminal)
        for row in terminal:
            assert row.lhs <= 1e-6
        _report("criterion 6 (uniqueness and convergence)",
                unique + monotone + terminal)
