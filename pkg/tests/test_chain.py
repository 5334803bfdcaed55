"""Tests for the behavior-chain machinery.

The stationary solver is cross-checked against an independent linear-solve
oracle: solve pi (M - I) = 0 subject to sum(pi) = 1 as a least-squares
system. The oracle never calls the power-iteration path.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from greenbasket.chain import (
    BEHAVIOR_LABELS,
    AdoptionTransform,
    BehaviorState,
    ChainStructureError,
    ConvergenceError,
    MacroState,
    MatrixValidationError,
    TransitionMatrix,
    apply_transform,
    compare,
    format_matrix,
    load_matrix,
    load_transform,
    parse_matrix,
    parse_transform,
    stationary,
    validate_matrix,
)
from greenbasket.errors import ConfigError, ValidationError

WATCHED = ("S6", "S9", "S12", "S14")


def stationary_by_linear_solve(matrix: TransitionMatrix) -> dict[str, float]:
    """Independent oracle: least-squares solve of the stationarity system."""
    m = np.asarray(matrix.rows, dtype=float)
    n = m.shape[0]
    a = np.vstack([m.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return dict(zip(matrix.labels, pi.tolist()))


def l1_distance(left: dict[str, float], right: dict[str, float]) -> float:
    return sum(abs(left[k] - right[k]) for k in left)


def random_ergodic_matrix(rng: np.random.Generator, size: int) -> TransitionMatrix:
    """Strictly positive rows: irreducible and aperiodic by construction."""
    rows = rng.dirichlet(np.full(size, 0.7), size=size)
    labels = tuple(f"S{i + 1}" for i in range(size))
    return validate_matrix(rows, labels)


@pytest.fixture(scope="module")
def maria(data_dir):
    return load_matrix(data_dir / "chains" / "maria_baseline.txt")


@pytest.fixture(scope="module")
def olivia(data_dir):
    return load_matrix(data_dir / "chains" / "olivia_baseline.txt")


@pytest.fixture(scope="module")
def maria_adoption(data_dir):
    return load_transform(data_dir / "chains" / "maria_adoption.txt")


@pytest.fixture(scope="module")
def olivia_adoption(data_dir):
    return load_transform(data_dir / "chains" / "olivia_adoption.txt")


# --- state vocabulary ----------------------------------------------------------


def test_fifteen_states_with_expected_macro_grouping():
    assert len(BehaviorState) == 15
    grouping = {
        MacroState.PREPARATION: {"S1", "S2"},
        MacroState.SUPPORT: {"S3", "S4", "S5"},
        MacroState.INFLUENCE_ON_PURCHASES: {"S6", "S7", "S8"},
        MacroState.PURCHASE_ATTENTION: {"S9", "S10"},
        MacroState.ITEM_COMPARISON: {"S11", "S12", "S13"},
        MacroState.SHARING: {"S14", "S15"},
    }
    for macro, names in grouping.items():
        assert {s.name for s in BehaviorState if s.macro_state is macro} == names
    assert all(s.description for s in BehaviorState)


# --- validation ----------------------------------------------------------------


def test_identity_matrix_is_valid():
    matrix = validate_matrix(np.eye(15), BEHAVIOR_LABELS)
    assert matrix.size == 15
    assert matrix.probability("S4", "S4") == 1.0


def test_row_not_summing_to_one_names_the_row():
    rows = np.eye(15)
    rows[6, 6] = 0.9
    with pytest.raises(MatrixValidationError) as err:
        validate_matrix(rows, BEHAVIOR_LABELS)
    assert any(v.row == "S7" and "0.9" in v.reason for v in err.value.violations)


def test_negative_entry_names_row_and_column():
    rows = np.eye(3)
    rows[1, 2] = -0.25
    rows[1, 1] = 1.25
    with pytest.raises(MatrixValidationError) as err:
        validate_matrix(rows, ("A", "B", "C"))
    violations = err.value.violations
    assert any(v.row == "B" and v.column == "C" and "negative" in v.reason for v in violations)
    assert any(v.row == "B" and v.column == "B" and "exceeds 1" in v.reason for v in violations)


def test_all_violations_reported_at_once():
    rows = np.eye(4)
    rows[0, 0] = 0.5
    rows[2, 2] = 2.0
    with pytest.raises(MatrixValidationError) as err:
        validate_matrix(rows, ("A", "B", "C", "D"))
    assert len(err.value.violations) >= 3  # bad sum, entry > 1, bad sum


def test_wrong_dimension_rejected():
    with pytest.raises(MatrixValidationError) as err:
        validate_matrix(np.eye(3), ("A", "B"))
    assert "shape" in str(err.value)


def test_duplicate_label_rejected():
    with pytest.raises(MatrixValidationError) as err:
        validate_matrix(np.eye(3), ("A", "B", "B"))
    assert "duplicate" in str(err.value)


def test_shipped_baselines_are_row_stochastic(maria, olivia):
    # independent summation, not the validator's own arithmetic
    for matrix in (maria, olivia):
        assert matrix.labels == BEHAVIOR_LABELS
        for i in range(15):
            assert math.fsum(matrix.rows[i].tolist()) == pytest.approx(1.0, abs=1e-9)
            assert all(0.0 <= v <= 1.0 for v in matrix.rows[i])


def test_matrix_rows_are_immutable(maria):
    with pytest.raises(ValueError):
        maria.rows[0, 0] = 0.5


# --- transforms ----------------------------------------------------------------


def test_empty_transform_is_identity(maria):
    unchanged = apply_transform(maria, AdoptionTransform("noop", {}))
    assert np.array_equal(unchanged.rows, maria.rows)
    assert unchanged.labels == maria.labels


def test_maria_adoption_rows_match_published_values(maria, maria_adoption):
    after = apply_transform(maria, maria_adoption)
    assert after.probability("S1", "S3") == 0.80
    assert after.probability("S1", "S5") == 0.10
    assert after.probability("S3", "S6") == 0.70
    assert after.probability("S3", "S7") == 0.15
    assert after.probability("S3", "S8") == 0.15
    # residual 0.10 of row S1 placed on S4 (flagged in the data file)
    assert after.probability("S1", "S4") == 0.10


def test_olivia_adoption_rows_match_published_values(olivia, olivia_adoption):
    after = apply_transform(olivia, olivia_adoption)
    assert after.probability("S1", "S3") == 0.85
    assert after.probability("S1", "S4") == 0.10
    assert after.probability("S1", "S5") == 0.05
    assert after.probability("S3", "S6") == 0.80
    assert after.probability("S3", "S7") == 0.10
    assert after.probability("S3", "S8") == 0.10
    assert after.probability("S9", "S12") == 0.75
    assert after.probability("S9", "S13") == 0.15
    # residual 0.10 of row S9 placed on S11 (flagged in the data file)
    assert after.probability("S9", "S11") == 0.10


def test_transform_leaves_unnamed_rows_untouched(maria, maria_adoption):
    after = apply_transform(maria, maria_adoption)
    for label in BEHAVIOR_LABELS:
        if label not in maria_adoption.row_overrides:
            i = maria.index(label)
            assert np.array_equal(after.rows[i], maria.rows[i])


def test_apply_transform_is_idempotent(maria, olivia, maria_adoption, olivia_adoption):
    for base, transform in [(maria, maria_adoption), (olivia, olivia_adoption)]:
        once = apply_transform(base, transform)
        twice = apply_transform(once, transform)
        assert np.array_equal(once.rows, twice.rows)


def test_invalid_override_row_rejected_at_construction():
    with pytest.raises(ValidationError) as err:
        AdoptionTransform("bad", {"S1": tuple([0.5] + [0.0] * 14)})
    assert err.value.field == "S1"


def test_transform_row_length_must_match(maria):
    transform = AdoptionTransform("short", {"S1": (0.5, 0.5)})
    with pytest.raises(ValidationError):
        apply_transform(maria, transform)


def test_transform_unknown_state_rejected(maria):
    row = tuple([1.0] + [0.0] * 14)
    with pytest.raises(ValidationError):
        apply_transform(maria, AdoptionTransform("ghost", {"S99": row}))


# --- stationary distributions ----------------------------------------------------


def test_stationary_symmetric_two_state_chain():
    matrix = validate_matrix([[0.5, 0.5], [0.5, 0.5]], ("A", "B"))
    result = stationary(matrix)
    assert result.probabilities["A"] == pytest.approx(0.5, abs=1e-9)
    assert result.probabilities["B"] == pytest.approx(0.5, abs=1e-9)


def test_stationary_hand_solved_two_state_chain():
    # solve pi M = pi with pi1 + pi2 = 1 by hand:
    # 0.9 a + 0.5 b = a  =>  0.5 b = 0.1 a  =>  b = a / 5  =>  a = 5/6
    matrix = validate_matrix([[0.9, 0.1], [0.5, 0.5]], ("A", "B"))
    result = stationary(matrix)
    assert result.probabilities["A"] == pytest.approx(5 / 6, abs=1e-9)
    assert result.probabilities["B"] == pytest.approx(1 / 6, abs=1e-9)


def test_stationary_probabilities_sum_to_one(maria):
    result = stationary(maria)
    assert math.fsum(result.probabilities.values()) == pytest.approx(1.0, abs=1e-9)


def test_stationary_of_shipped_chains_matches_linear_solve_oracle(
    maria, olivia, maria_adoption, olivia_adoption
):
    chains = [
        maria,
        olivia,
        apply_transform(maria, maria_adoption),
        apply_transform(olivia, olivia_adoption),
    ]
    for matrix in chains:
        result = stationary(matrix)
        oracle = stationary_by_linear_solve(matrix)
        assert l1_distance(result.probabilities, oracle) <= 1e-8
        assert result.residual <= 1e-9


def test_stationary_matches_oracle_on_random_chains():
    rng = np.random.default_rng(20260810)
    for trial in range(30):
        matrix = random_ergodic_matrix(rng, int(rng.integers(3, 16)))
        result = stationary(matrix)
        oracle = stationary_by_linear_solve(matrix)
        assert l1_distance(result.probabilities, oracle) <= 1e-8


def test_stationary_residual_bounded_by_tolerance():
    rng = np.random.default_rng(7)
    for tolerance in (1e-8, 1e-10):
        matrix = random_ergodic_matrix(rng, 8)
        result = stationary(matrix, tolerance=tolerance)
        assert result.residual <= 10 * tolerance


def test_stationary_rejects_reducible_chain():
    # two disconnected 2-state blocks
    rows = [
        [0.5, 0.5, 0.0, 0.0],
        [0.5, 0.5, 0.0, 0.0],
        [0.0, 0.0, 0.5, 0.5],
        [0.0, 0.0, 0.5, 0.5],
    ]
    matrix = validate_matrix(rows, ("A", "B", "C", "D"))
    with pytest.raises(ChainStructureError) as err:
        stationary(matrix)
    assert err.value.code == "chain_reducible"
    assert err.value.states  # names an offending component


def test_stationary_rejects_periodic_chain():
    matrix = validate_matrix([[0.0, 1.0], [1.0, 0.0]], ("A", "B"))
    with pytest.raises(ChainStructureError) as err:
        stationary(matrix)
    assert err.value.code == "chain_periodic"
    assert "period 2" in str(err.value)


def test_stationary_non_convergence_carries_residual():
    matrix = validate_matrix([[0.9, 0.1], [0.5, 0.5]], ("A", "B"))
    with pytest.raises(ConvergenceError) as err:
        stationary(matrix, tolerance=1e-12, max_iterations=2)
    assert err.value.iterations == 2
    assert err.value.residual > 0


def test_stationary_relabeling_invariance(maria):
    """Permuting states and the matrix consistently permutes the result."""
    rng = np.random.default_rng(99)
    perm = rng.permutation(15)
    labels = tuple(maria.labels[i] for i in perm)
    rows = maria.rows[np.ix_(perm, perm)]
    permuted = validate_matrix(rows, labels)
    base = stationary(maria)
    shuffled = stationary(permuted)
    for label in maria.labels:
        assert shuffled.probabilities[label] == pytest.approx(
            base.probabilities[label], abs=1e-8
        )


# --- before/after comparison ------------------------------------------------------


def test_compare_equal_distributions_is_all_zero(maria):
    pi = stationary(maria)
    report = compare(pi, pi, watch=WATCHED)
    assert all(d == 0.0 for d in report.delta.values())
    assert not any(report.increased.values())


def test_compare_label_mismatch_rejected():
    a = stationary(validate_matrix([[0.5, 0.5], [0.5, 0.5]], ("A", "B")))
    b = stationary(validate_matrix([[0.5, 0.5], [0.5, 0.5]], ("X", "Y")))
    with pytest.raises(ValidationError):
        compare(a, b)


def test_compare_unknown_watch_state_rejected(maria):
    pi = stationary(maria)
    with pytest.raises(ValidationError):
        compare(pi, pi, watch=("S99",))


@pytest.mark.parametrize("persona", ["maria", "olivia"])
def test_adoption_increases_all_watched_states(persona, request):
    """Strict stationary-probability gains for S6, S9, S12 and S14 on the
    shipped baselines. This holds for these matrices by construction; it is
    not a theorem for arbitrary baselines."""
    base = request.getfixturevalue(persona)
    transform = request.getfixturevalue(f"{persona}_adoption")
    before = stationary(base)
    after = stationary(apply_transform(base, transform))
    report = compare(before, after, watch=WATCHED)
    assert report.all_watched_increased, report.delta
    for state in WATCHED:
        assert report.delta[state] > 0


# --- document parsing ---------------------------------------------------------------


def test_parse_matrix_round_trip(maria):
    again = parse_matrix(format_matrix(maria, comment="round trip"))
    assert again.labels == maria.labels
    assert np.allclose(again.rows, maria.rows, atol=1e-9)


def test_parse_transform_reads_name(maria_adoption):
    assert maria_adoption.name == "maria-adoption"
    assert set(maria_adoption.row_overrides) == {"S1", "S3"}


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("", "empty document"),
        ("rows: A B", "expected 'states:"),
        ("states: A B\nA: 1 0", "missing rows"),
        ("states: A B\nA: 1 0\nA: 0 1\nB: 0 1", "duplicate row"),
        ("states: A B\nA: 1 0\nC: 0 1", "unknown state"),
        ("states: A B\nA: 1 0 0\nB: 0 1", "3 entries"),
        ("states: A B\nA: one 0\nB: 0 1", "could not convert"),
    ],
)
def test_parse_matrix_errors(text, fragment):
    with pytest.raises(ConfigError) as err:
        parse_matrix(text, source="doc")
    assert fragment in str(err.value)


def test_parse_transform_requires_name():
    with pytest.raises(ConfigError):
        parse_transform("states: A B\nA: 1 0", source="doc")


def test_parse_transform_rejects_non_stochastic_override():
    text = "name: t\nstates: A B\nA: 0.5 0.4"
    with pytest.raises(ConfigError) as err:
        parse_transform(text, source="doc")
    assert "sums to" in str(err.value)


def test_load_matrix_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_matrix(tmp_path / "nope.txt")
