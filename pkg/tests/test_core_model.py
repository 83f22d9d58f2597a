import math
import statistics

import pytest
from hypothesis import given, strategies as st

from antclust.core_model import (
    Ant,
    ClusteringResult,
    Parameters,
    init_ant,
    record_meeting_observation,
    validate_ant,
)
from antclust.errors import ConfigError, SimilarityRangeError

sims = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def test_init_ant_zeroed():
    ant = init_ant(0)
    assert ant.label is None
    assert ant.age == 0
    assert ant.m == 0.0 and ant.m_plus == 0.0
    assert ant.sim_max == 0.0 and ant.sim_mean == 0.0
    assert ant.template == 0.0
    assert ant.meeting_count == 0


def test_init_ant_index_independent():
    ant = init_ant(41)
    assert ant.genetic_index == 41
    zeroed = init_ant(0)
    assert (ant.age, ant.m, ant.m_plus, ant.sim_max, ant.sim_mean, ant.template) == (
        zeroed.age,
        zeroed.m,
        zeroed.m_plus,
        zeroed.sim_max,
        zeroed.sim_mean,
        zeroed.template,
    )


def test_init_ant_equality_except_identity():
    a, b = init_ant(7), init_ant(7)
    assert a == b
    assert a is not b


def test_init_ant_rejects_negative_index():
    with pytest.raises(ConfigError):
        init_ant(-1)


def test_first_observation():
    ant = init_ant(0)
    record_meeting_observation(ant, 0.8)
    assert ant.sim_mean == 0.8
    assert ant.sim_max == 0.8
    assert ant.template == 0.8
    assert ant.meeting_count == 1
    assert ant.age == 1


def test_two_observations_mean_and_template():
    ant = init_ant(0)
    record_meeting_observation(ant, 0.4)
    record_meeting_observation(ant, 0.8)
    assert ant.sim_mean == pytest.approx(0.6, abs=1e-12)
    assert ant.sim_max == 0.8
    assert ant.template == pytest.approx(0.7, abs=1e-12)


def test_zero_similarity_observation():
    ant = init_ant(0)
    record_meeting_observation(ant, 0.0)
    assert ant.sim_mean == 0.0 and ant.sim_max == 0.0 and ant.template == 0.0
    assert ant.meeting_count == 1


@pytest.mark.parametrize("bad", [-0.1, 1.1, math.inf, math.nan])
def test_invalid_similarity_rejected(bad):
    ant = init_ant(0)
    with pytest.raises(SimilarityRangeError):
        record_meeting_observation(ant, bad)
    assert ant.meeting_count == 0 and ant.age == 0


@given(st.lists(sims, min_size=1, max_size=200))
def test_incremental_mean_matches_stored_list(observed):
    ant = init_ant(0)
    for s in observed:
        record_meeting_observation(ant, s)
    assert ant.sim_mean == pytest.approx(statistics.fmean(observed), abs=1e-12)
    assert ant.sim_max == max(observed)
    assert ant.meeting_count == len(observed) == ant.age


@given(st.lists(sims, min_size=1, max_size=100))
def test_template_bracketed_after_every_observation(observed):
    ant = init_ant(0)
    for s in observed:
        record_meeting_observation(ant, s)
        assert 0.0 <= ant.sim_mean <= ant.sim_max + 1e-15 <= 1.0 + 1e-15
        assert min(ant.sim_mean, ant.sim_max) <= ant.template <= max(ant.sim_mean, ant.sim_max)
        validate_ant(ant)


@given(st.lists(sims, min_size=2, max_size=60), st.randoms(use_true_random=False))
def test_statistics_order_insensitive(observed, rnd):
    shuffled = observed[:]
    rnd.shuffle(shuffled)
    a, b = init_ant(0), init_ant(1)
    for s in observed:
        record_meeting_observation(a, s)
    for s in shuffled:
        record_meeting_observation(b, s)
    assert a.sim_max == b.sim_max
    assert a.sim_mean == pytest.approx(b.sim_mean, abs=1e-9)


def test_parameters_defaults():
    p = Parameters()
    assert p.update_alpha == 0.2
    assert p.iter_alpha == 150.0
    assert p.beta == 0.9
    assert p.shrink_threshold == 0.5
    assert p.seed == 0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"update_alpha": 0.0},
        {"update_alpha": 1.0},
        {"iter_alpha": 0.0},
        {"iter_alpha": -3.0},
        {"beta": 0.0},
        {"shrink_threshold": 0.0},
        {"shrink_threshold": 1.5},
        {"seed": -1},
        {"seed": 2**64},
    ],
)
def test_parameters_validation(kwargs):
    with pytest.raises(ConfigError):
        Parameters(**kwargs)


def test_validate_ant_catches_corruption():
    ant = init_ant(0)
    record_meeting_observation(ant, 0.5)
    ant.template = 0.9  # no longer the midpoint
    with pytest.raises(AssertionError):
        validate_ant(ant)
    broken = Ant(genetic_index=0, m=1.5)
    with pytest.raises(AssertionError):
        validate_ant(broken)


def test_clustering_result_is_value_like():
    r = ClusteringResult(labels=(0, 0, 1), colony_count=2, seed_used=9)
    assert r == ClusteringResult((0, 0, 1), 2, 9)
    assert len(r.labels) == 3
