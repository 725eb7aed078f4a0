import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from qgames.equilibria import pure_nash
from qgames.gamelib import (
    BOX_A,
    PSI0,
    GvwSetup,
    WiesnerRound,
    alice_interpolated,
    authenticate,
    banknote_from_json,
    banknote_to_json,
    gvw_expected_gains,
    gvw_odds,
    hadamard_mobius,
    penny_flip,
    penny_flip_optimal_q,
    prisoners_dilemma,
    state_from_coordinate,
    wiesner_pass_probability,
    wiesner_round,
)
from qgames.gamemodel import F, N, GeneralChannel, PureClassical, flip_channel, play
from qgames.qcore import HADAMARD, KET0, KET1, ValidationError, apply_unitary, density_from_pure

# Picard rows N, F; Q columns NN, NF, FN, FF
PENNY_TABLE = [[-1, 1, 1, -1], [1, -1, -1, 1]]


def gvw_enumeration(alice_amps, v, r):
    """Bob's expected gain by listing every (action, outcome) leaf with its probability."""
    a = np.asarray(alice_amps, dtype=complex)
    p_b = abs(a[1]) ** 2
    p_pass = abs(np.vdot(PSI0.amps, a)) ** 2
    leaves = [
        ((1 - v) * p_b, +1.0),
        ((1 - v) * (1 - p_b), -1.0),
        (v * (1 - p_pass), r),
        (v * p_pass, -1.0),
    ]
    assert sum(w for w, _ in leaves) == pytest.approx(1.0)
    return sum(w * g for w, g in leaves)


# -- penny flip ---------------------------------------------------------------------

def test_penny_table_reproduced_exactly():
    g = penny_flip()
    for pic in range(2):
        for k, (q1, q2) in enumerate(itertools.product(range(2), repeat=2)):
            _, pay = play(g, PureClassical([pic]), PureClassical([q1, q2]))
            assert pay.p_a == PENNY_TABLE[pic][k]


@pytest.mark.parametrize("q, pic", [((0, 0), 0), ((1, 1), 0), ((0, 1), 1)])
def test_penny_examples(q, pic):
    assert play(penny_flip(), PureClassical([pic]), PureClassical(q))[1].p_a == -1


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_optimal_q_endpoints(p):
    assert play(penny_flip(), GeneralChannel([flip_channel(p)]), penny_flip_optimal_q())[1].p_a == pytest.approx(-1, abs=1e-12)


def test_optimal_q_intermediate_state_invariant():
    h = penny_flip_optimal_q().ops[0]
    rho1 = apply_unitary(density_from_pure(KET0), h)
    for u in (F, N):
        assert np.max(np.abs(apply_unitary(rho1, u).entries - rho1.entries)) <= 1e-12


# -- Prisoner's Dilemma -------------------------------------------------------------------

def test_pd_table():
    g = prisoners_dilemma()
    assert g.payoff_a[0, 1] == 0 and g.payoff_b[0, 1] == 5
    np.testing.assert_array_equal(g.payoff_b, g.payoff_a.T)
    assert pure_nash(g) == [(1, 1)]
    assert g.row_labels == ("C", "D")


# -- Wiesner rounds -------------------------------------------------------------------------

def test_matched_bits_always_pass(rng):
    for _ in range(100):
        t, anc = random_state(rng), random_state(rng)
        for bit in (0, 1):
            assert wiesner_round(WiesnerRound("swap", t, anc, bit, bit))[0] == pytest.approx(1, abs=1e-12)
            assert wiesner_round(WiesnerRound("hadamard", t, None, bit, bit))[0] == pytest.approx(1, abs=1e-12)


def test_hadamard_mismatch_on_zero():
    assert wiesner_round(WiesnerRound("hadamard", KET0, None, 1, 0))[0] == pytest.approx(0.5, abs=1e-12)


def test_swap_mismatch_is_overlap(rng):
    for _ in range(100):
        t, anc = random_state(rng), random_state(rng)
        want = abs(np.vdot(t.amps, anc.amps)) ** 2
        for a, b in ((0, 1), (1, 0)):
            assert wiesner_round(WiesnerRound("swap", t, anc, a, b))[0] == pytest.approx(want, abs=1e-12)


def test_closed_form_matches_circuit(rng):
    rows = []
    for _ in range(40):
        t, anc = random_state(rng), random_state(rng)
        for a, b in itertools.product(range(2), repeat=2):
            rows.append((t, anc, a, b))
    trent = np.array([r[0].amps for r in rows])
    anc = np.array([r[1].amps for r in rows])
    bits_a = np.array([r[2] for r in rows])
    bits_b = np.array([r[3] for r in rows])
    for variant in ("swap", "hadamard"):
        fast = wiesner_pass_probability(variant, bits_a, bits_b, trent, anc)
        slow = [wiesner_round(WiesnerRound(variant, t, a if variant == "swap" else None, x, y))[0]
                for t, a, x, y in rows]
        np.testing.assert_allclose(fast, slow, atol=1e-12)


def test_hadamard_mismatch_formula(rng):
    for _ in range(20):
        t = random_state(rng)
        want = abs(np.vdot(t.amps, HADAMARD.entries @ t.amps)) ** 2
        assert wiesner_round(WiesnerRound("hadamard", t, None, 0, 1))[0] == pytest.approx(want, abs=1e-12)


def test_round_validation():
    with pytest.raises(ValidationError):
        WiesnerRound("swap", KET0)
    with pytest.raises(ValidationError):
        WiesnerRound("hadamard", KET0, KET1)
    with pytest.raises(ValidationError):
        WiesnerRound("hadamard", KET0, alice_bit=2)
    with pytest.raises(ValidationError):
        WiesnerRound("cnot", KET0)


# -- Hadamard Moebius map ---------------------------------------------------------------------

def test_mobius_examples():
    assert hadamard_mobius(0) == 1
    assert hadamard_mobius(1) == 0
    assert hadamard_mobius(math.inf) == -1
    assert hadamard_mobius(-1) == math.inf


def test_mobius_involution(rng):
    pts = list(rng.normal(size=98) + 1j * rng.normal(size=98)) + [math.inf, -1]
    for z in pts:
        back = hadamard_mobius(hadamard_mobius(z))
        if z == math.inf:
            assert back == math.inf
        else:
            assert back == pytest.approx(z, abs=1e-9 * max(1, abs(z)))


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_mobius_is_hadamard_on_coordinates(z):
    if abs(z + 1) < 1e-6:
        return
    psi = state_from_coordinate(z)
    image = state_from_coordinate(hadamard_mobius(z))
    assert abs(np.vdot(image.amps, HADAMARD.entries @ psi.amps)) == pytest.approx(1, abs=1e-9)


# -- banknotes ---------------------------------------------------------------------------------

def test_banknote_round_trip_and_authentication(rng):
    rounds = [WiesnerRound("swap", random_state(rng), random_state(rng), 1, 0),
              WiesnerRound("hadamard", random_state(rng), None, 0, 0),
              WiesnerRound("hadamard", KET0, None, 1, 0)]
    back = banknote_from_json(banknote_to_json(rounds))
    assert [r.alice_bit for r in back] == [1, 0, 1]
    for r, s in zip(rounds, back):
        np.testing.assert_array_equal(r.trent_state.amps, s.trent_state.amps)
    assert authenticate(back, [1, 0, 1]) == pytest.approx(1, abs=1e-12)
    t, anc = rounds[0].trent_state.amps, rounds[0].ancilla_state.amps
    want = abs(np.vdot(t, anc)) ** 2 * 0.5
    assert authenticate(back, [0, 0, 0]) == pytest.approx(want, abs=1e-12)
    with pytest.raises(ValidationError):
        authenticate(back, [0, 0])


# -- GVW gambling ----------------------------------------------------------------------------------

@pytest.mark.parametrize("v", [0.0, 0.3, 1.0])
def test_honest_alice_costs_bob_v(v):
    pay = gvw_expected_gains(GvwSetup(PSI0, 2.5, v))
    assert pay.p_b == pytest.approx(-v, abs=1e-12)
    assert pay.p_b == pytest.approx(gvw_enumeration(PSI0.amps, v, 2.5), abs=1e-12)


def test_all_in_a():
    assert gvw_expected_gains(GvwSetup(BOX_A, 3.0, 0.0)).p_b == pytest.approx(-1, abs=1e-12)
    assert gvw_expected_gains(GvwSetup(BOX_A, 3.0, 1.0)).p_b == pytest.approx(1.0, abs=1e-12)


def test_gains_match_enumeration_and_are_zero_sum(rng):
    for _ in range(100):
        psi = random_state(rng)
        v, r = rng.uniform(), rng.uniform(0.1, 10)
        pay = gvw_expected_gains(GvwSetup(psi, r, v))
        assert pay.p_a + pay.p_b == pytest.approx(0, abs=1e-12)
        assert pay.p_b == pytest.approx(gvw_enumeration(psi.amps, v, r), abs=1e-12)


def test_mixed_alice_is_average(rng):
    psi1, psi2 = random_state(rng), random_state(rng)
    s = GvwSetup(PSI0, 2.0, 0.4)
    mixed = gvw_expected_gains(s, [(0.3, psi1), (0.7, psi2)]).p_b
    avg = 0.3 * gvw_enumeration(psi1.amps, 0.4, 2.0) + 0.7 * gvw_enumeration(psi2.amps, 0.4, 2.0)
    assert mixed == pytest.approx(avg, abs=1e-12)
    with pytest.raises(ValidationError):
        gvw_expected_gains(s, [(0.5, psi1), (0.6, psi2)])


def test_cheating_tradeoff_monotone():
    ts = np.linspace(0, 1, 21)
    odds = [gvw_odds(density_from_pure(alice_interpolated(t))) for t in ts]
    find = [o.find_prob for o in odds]
    fail = [1 - o.verify_pass_prob for o in odds]
    assert all(x > y for x, y in zip(find, find[1:]))
    assert all(x < y for x, y in zip(fail, fail[1:]))


def test_setup_validation():
    with pytest.raises(ValidationError):
        GvwSetup(PSI0, 0.0, 0.5)
    with pytest.raises(ValidationError):
        GvwSetup(PSI0, 1.0, 1.5)
    with pytest.raises(ValidationError):
        alice_interpolated(1.5)
