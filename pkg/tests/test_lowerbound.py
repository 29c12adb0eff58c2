import pytest

from dfrechet.core import InvalidInputError, MoveModel, sq_dist
from dfrechet.lowerbound import (
    MAX_M,
    check_instance,
    generate,
    red_mask,
    sequence_for_subset,
    verify_exponential,
)
from dfrechet.naive import reach_matrix


def inside(c, p):
    return sq_dist(c, p) <= 1.0


def test_m1_layout():
    inst = generate(1)
    assert inst.epsilon == 0.25
    assert len(inst.A) == 2
    b1 = inst.lens[0]
    assert b1 == (0.9375, 0.0)
    blue, red = inst.A[inst.blue(1)], inst.A[inst.red(1)]
    assert inside(blue, b1) and inside(red, b1)
    assert inside(red, inst.deep) and not inside(blue, inst.deep)


def test_m2_first_and_last_disjoint():
    inst = generate(2)
    p1 = inst.A[inst.blue(1)]
    r2 = inst.A[inst.red(2)]
    gap = abs(p1[0] - r2[0])
    assert gap == pytest.approx(2 + inst.epsilon / 2)
    assert gap > 2


@pytest.mark.parametrize("m", range(1, 16))
def test_generated_instances_verify(m):
    assert check_instance(generate(m)) == []


def test_sequence_for_subset_examples():
    inst = generate(2)
    b1, b2 = inst.lens
    bp1, bp2 = inst.above
    assert sequence_for_subset(inst, [1, 2]).xy.tolist() == [list(b1), list(b2), list(inst.deep)]
    assert sequence_for_subset(inst, [2]).xy.tolist() == [list(b1), list(bp1), list(b2), list(inst.deep)]
    assert len(sequence_for_subset(inst, [])) == 2 * 2 + 1
    with pytest.raises(InvalidInputError):
        sequence_for_subset(inst, [3])


def test_range_checks():
    with pytest.raises(InvalidInputError):
        generate(0)
    with pytest.raises(InvalidInputError):
        generate(MAX_M + 1)
    with pytest.raises(InvalidInputError):
        verify_exponential(generate(13))


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6, 7, 8])
def test_exponential_states(m):
    rep = verify_exponential(generate(m))
    assert rep.ok, rep.summary()
    assert rep.distinct_states == 2**m
    assert rep.diagonal_distinct is not None


def test_all_reds_never_detour():
    inst = generate(5)
    S = range(1, 6)
    B = sequence_for_subset(inst, S)
    assert len(B) == 6
    col = reach_matrix(inst.A, B, 1.0, MoveModel.ORTHOGONAL)[:, -1]
    assert sum(1 << i for i, v in enumerate(col) if v) == red_mask(S)


def test_to_dict_shape():
    d = generate(3).to_dict()
    assert d["m"] == 3 and len(d["A"]) == 6 and len(d["lens"]) == 3 and len(d["above"]) == 3
