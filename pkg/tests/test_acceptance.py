"""Acceptance gate: every verification criterion at its stated tolerance.

Each test prints one PASS/FAIL line so the suite reads as a checklist.  The
final test runs the CLI ``verify`` twice end to end and compares every output
file byte for byte.
"""

import filecmp

import pytest

from greedy_opt.cli import main
from greedy_opt.verification import (
    VerifyContext,
    c01_gradient_method_equivalence,
    c02_adaptive_energy_inequality,
    c03_smoothness_gap_sweep,
    c04_score_gap_bound_sweep,
    c05_fixed_schedule_convergence,
    c06_power_schedule_rate,
    c07_adaptive_rate,
    c08_adaptive_sphere_rate,
    c09_exact_line_search_two_step,
    c10_line_search_logistic_convergence,
    c11_oracle_equivalences,
    c12_trace_determinism,
    inv_hoelder_duality,
    inv_majorant_domination,
    inv_objective_contracts,
)

CRITERIA = [
    c01_gradient_method_equivalence,
    c02_adaptive_energy_inequality,
    c03_smoothness_gap_sweep,
    c04_score_gap_bound_sweep,
    c05_fixed_schedule_convergence,
    c06_power_schedule_rate,
    c07_adaptive_rate,
    c08_adaptive_sphere_rate,
    c09_exact_line_search_two_step,
    c10_line_search_logistic_convergence,
    c11_oracle_equivalences,
    c12_trace_determinism,
    inv_objective_contracts,
    inv_majorant_domination,
    inv_hoelder_duality,
]


@pytest.mark.parametrize("criterion", CRITERIA,
                         ids=lambda fn: fn.__name__.lstrip("_"))
def test_criterion(criterion):
    result = criterion(VerifyContext(out_dir=None))
    print(f"{'PASS' if result.passed else 'FAIL'}  {result.name}: "
          f"{result.detail}")
    assert result.passed, f"{result.name}: {result.detail}"


def test_verify_cli_is_byte_deterministic(tmp_path, capsys):
    """Two back-to-back ``verify`` invocations write identical trace files."""
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["verify", "--out", str(first)]) == 0
    assert main(["verify", "--out", str(second)]) == 0
    capsys.readouterr()
    files = sorted(p.name for p in first.iterdir())
    assert files == sorted(p.name for p in second.iterdir())
    assert len(files) > 0
    match, mismatch, errors = filecmp.cmpfiles(first, second, files,
                                               shallow=False)
    assert not mismatch and not errors
    print(f"PASS  verify determinism: {len(match)} files byte-identical")


def test_verify_cli_fault_injection_names_the_violation(tmp_path, capsys):
    """Halving the declared quadratic majorants must fail verify loudly."""
    code = main(["verify", "--out", str(tmp_path / "fault"),
                 "--inject-fault", "gamma-half"])
    out = capsys.readouterr().out
    assert code == 1
    assert "MAJORANT_VIOLATION" in out
    print("PASS  fault injection: verify exits 1 naming MAJORANT_VIOLATION")
