"""Level reduction: Schur complements, rhs collapse, chains, pivot walks."""
from fractions import Fraction

import numpy as np
import pytest

import hmvp
from hmvp import (
    ValidationConfig,
    back_substitute,
    build_chain,
    dense_schur,
    from_dense,
    inversion_counts,
    pivot_walk_is_pd,
    reduce_rhs,
    reset_inversion_counts,
    schur_complement,
    template_for,
    to_dense,
)
from hmvp.errors import LevelOutOfRange, SingularInteriorBlock
from hmvp.generator import GeneratorConfig, generate
from hmvp.reduction import invert_interior_blocks, solve_base

# One reduction step of the reference instance has an exact rational value;
# frozen here (upper triangle of the resulting 6x6) as an external anchor
# that would catch any systematic error in the elimination formulas.
REDUCED_REFERENCE = {
    (0, 0): Fraction(1051, 181),
    (1, 1): Fraction(2438, 209),
    (2, 2): Fraction(4289, 733),
    (0, 1): Fraction(0),
    (0, 2): Fraction(0),
    (1, 2): Fraction(0),
    (0, 3): Fraction(288, 181),
    (0, 4): Fraction(-57, 362),
    (0, 5): Fraction(0),
    (1, 3): Fraction(-195, 418),
    (1, 4): Fraction(0),
    (1, 5): Fraction(117, 418),
    (2, 3): Fraction(0),
    (2, 4): Fraction(110, 733),
    (2, 5): Fraction(60, 733),
    (3, 3): Fraction(518273, 151316),
    (3, 4): Fraction(38, 181),
    (3, 5): Fraction(-107, 836),
    (4, 4): Fraction(3010675, 265346),
    (4, 5): Fraction(-74, 733),
    (5, 5): Fraction(4124565, 612788),
}


def test_schur_reference_exact_rationals(reference_cov):
    reduced = schur_complement(reference_cov)
    assert reduced.level == 1
    dense = to_dense(reduced)
    assert dense.shape == (6, 6)
    for (i, j), expected in REDUCED_REFERENCE.items():
        value = dense[i, j]
        if expected == 0:
            assert value == 0.0, f"entry ({i},{j}) should be exactly zero"
        else:
            rel = abs(value - float(expected)) / abs(float(expected))
            assert rel <= 1e-12, f"entry ({i},{j}) off by {rel:.2e}"
        assert dense[j, i] == value


@pytest.mark.parametrize("level", [2, 3, 4])
def test_schur_matches_dense_oracle(level):
    cov = generate(GeneratorConfig(level=level, seed=level * 31 + 5))
    tpl = cov.template
    nj = tpl.junction_count(level)
    reduced = schur_complement(cov)
    expected = dense_schur(to_dense(cov), nj)
    got = to_dense(reduced)
    scale = np.abs(expected).max()
    assert np.max(np.abs(got - expected)) <= 1e-12 * scale


def test_schur_reduces_to_base():
    cov = generate(GeneratorConfig(level=1, seed=4))
    reduced = schur_complement(cov)
    assert reduced.level == 0
    assert reduced.base is not None
    expected = dense_schur(to_dense(cov), 3)
    assert np.allclose(to_dense(reduced), expected, atol=1e-12)


def test_schur_rejects_base_level(reference_cov):
    base = schur_complement(schur_complement(reference_cov))
    with pytest.raises(LevelOutOfRange):
        schur_complement(base)


def test_reduce_rhs_matches_dense(reference_cov, reference_dense):
    y = np.arange(1.0, 16.0)
    reduced = reduce_rhs(reference_cov, y)
    nj = 6
    x_block = reference_dense[nj:, nj:]
    coupling = reference_dense[:nj, nj:]
    expected = y[:nj] - coupling @ np.linalg.solve(x_block, y[nj:])
    assert np.allclose(reduced, expected, atol=1e-12)


def test_back_substitute_inverts_reduce(reference_cov, reference_dense):
    # solving the reduced system then back-substituting solves the full one
    y = np.linspace(0.5, 2.0, 15)
    gamma = reduce_rhs(reference_cov, y)
    s_matrix = to_dense(schur_complement(reference_cov))
    v = np.linalg.solve(s_matrix, gamma)
    interior = back_substitute(reference_cov, v, y)
    full = np.concatenate([v, interior])
    assert np.allclose(reference_dense @ full, y, atol=1e-10)


def test_build_chain_shape(reference_cov):
    chain = build_chain(reference_cov)
    assert chain.top_level == 2
    assert [e.cov.level for e in chain.entries] == [2, 1, 0]
    assert np.array_equal(chain.rhs_at(2), np.ones(15))
    assert chain.inversion_count == 4  # 3 clusters at level 2, 1 at level 1
    assert chain.base_solution is None
    assert set(chain.inverted_blocks) == {2, 1}
    with pytest.raises(LevelOutOfRange):
        chain.cov_at(3)
    with pytest.raises(LevelOutOfRange):
        chain.inverses_at(0)


def test_chain_matches_iterated_dense_schur():
    cov = generate(GeneratorConfig(level=3, seed=77))
    chain = build_chain(cov)
    dense = to_dense(cov)
    for level in (2, 1):
        nj = template_for(level + 1).junction_count(level + 1)
        dense = dense_schur(dense, nj)
        got = to_dense(chain.cov_at(level))
        assert np.max(np.abs(got - dense)) <= 1e-11 * np.abs(dense).max()
    dense = dense_schur(dense, 3)
    assert np.allclose(to_dense(chain.cov_at(0)), dense, atol=1e-10)


def test_chain_rhs_recursion(reference_cov):
    chain = build_chain(reference_cov)
    for level in (2, 1):
        expected = reduce_rhs(chain.cov_at(level), chain.rhs_at(level))
        assert np.allclose(chain.rhs_at(level - 1), expected, atol=1e-14)


def test_singular_interior_block_raises(reference_cov):
    blocks = reference_cov.interior_blocks.copy()
    blocks[1] = 1.0  # rank one
    from hmvp.covariance import BlockCovariance

    broken = BlockCovariance.from_blocks(
        reference_cov.template, 2, reference_cov.junction_diag,
        blocks, reference_cov.coupling_blocks,
    )
    with pytest.raises(SingularInteriorBlock) as info:
        schur_complement(broken)
    assert info.value.cluster == 1
    assert info.value.level == 2


def test_inversion_registry(reference_cov):
    reset_inversion_counts()
    assert inversion_counts() == {}
    chain = build_chain(reference_cov)
    assert inversion_counts() == {3: 4}
    hmvp.compute_weights(chain)
    assert inversion_counts() == {3: 5}
    reset_inversion_counts()
    assert inversion_counts() == {}


def test_solve_base_matches_dense(rng):
    m = rng.standard_normal((3, 3))
    spd = m @ m.T + 3.0 * np.eye(3)
    y = rng.standard_normal(3)
    assert np.allclose(solve_base(spd, y), np.linalg.solve(spd, y), atol=1e-10)


def test_invert_interior_blocks_counts(reference_cov):
    reset_inversion_counts()
    inverses, minors = invert_interior_blocks(reference_cov)
    assert inversion_counts() == {3: 3}
    for c in range(3):
        assert np.allclose(
            reference_cov.interior_blocks[c] @ inverses[c], np.eye(3), atol=1e-12
        )
        assert minors[c, 0] == reference_cov.interior_blocks[c][0, 0]


@pytest.mark.parametrize("level", [1, 2, 3])
def test_pivot_walk_matches_eigenvalues(level):
    # PD instances pass, indefinite perturbations fail; the walk never raises
    cov = generate(GeneratorConfig(level=level, seed=level + 40))
    dense = to_dense(cov)
    threshold = 1e-10 * dense.diagonal().max()
    assert pivot_walk_is_pd(cov, threshold)
    assert np.linalg.eigvalsh(dense)[0] > 0

    tpl = cov.template
    nj = tpl.junction_count(level)
    spoiled = dense.copy()
    spoiled[nj, nj + 1] = spoiled[nj + 1, nj] = 100.0  # breaks an interior block
    assert np.linalg.eigvalsh(spoiled)[0] < 0
    weak = from_dense(spoiled, tpl, level)
    assert not pivot_walk_is_pd(weak, threshold)


def test_pivot_walk_threshold_semantics(reference_cov, reference_dense):
    lo = 1e-10 * reference_dense.diagonal().max()
    assert pivot_walk_is_pd(reference_cov, lo)
    # an absurdly large threshold rejects even healthy pivots
    assert not pivot_walk_is_pd(reference_cov, 1e6)
