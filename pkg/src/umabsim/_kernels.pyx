# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trial loops.

Runs a whole bandit trial without touching the interpreter. Draws uniforms
and Beta variates through numpy's C API on the caller's bit generator, in
the same order and under the same tie-break rules as the pure-Python path,
so both backends produce bit-identical traces from one seed.
"""

from libc.math cimport INFINITY, log, log1p
from libc.stdint cimport int64_t

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_beta, random_standard_uniform

import numpy as np

cdef double BISECTION_TOL = 1e-9
cdef int BISECTION_MAX_ITER = 200

POLICY_UTS = 0
POLICY_TS = 1
POLICY_KLUCB = 2
POLICY_OSUB = 3
POLICY_UNIFORM = 4


cdef inline double c_kl_bernoulli(double p, double q) nogil:
    # log1p form keeps the divergence accurate and nonnegative near q == p
    cdef double first, second, total
    cdef double d = q - p
    if p > 0.0:
        if q == 0.0:
            return INFINITY
        first = -p * log1p(d / p)
    else:
        first = 0.0
    if p < 1.0:
        if q == 1.0:
            return INFINITY
        second = (1.0 - p) * log1p(d / (1.0 - q))
    else:
        second = 0.0
    total = first + second
    return total if total > 0.0 else 0.0


cdef inline double c_klucb_index(double mean, int64_t pulls, double budget) nogil:
    cdef double lo, hi, mid
    cdef int it
    if mean >= 1.0:
        return 1.0
    lo = mean
    hi = 1.0
    for it in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if pulls * c_kl_bernoulli(mean, mid) <= budget:
            lo = mid
        else:
            hi = mid
        if hi - lo < BISECTION_TOL:
            break
    return lo


cdef inline double c_exploration_rate(double t, double c) nogil:
    cdef double lt = log(t)
    return lt + c * log(lt if lt > 1.0 else 1.0)


cdef inline long c_pick_tied(int64_t* ties, long count, bitgen_t* rng) nogil:
    # one uniform, consumed only on a real tie, clamped against u ~ 1.0
    cdef double u
    cdef long k
    if count == 1:
        return <long>ties[0]
    u = random_standard_uniform(rng)
    k = <long>(u * count)
    if k >= count:
        k = count - 1
    return <long>ties[k]


cdef long c_select_leader(double* s, int64_t* t, long num_arms,
                          int64_t* ties, bitgen_t* rng) nogil:
    cdef double best = -1.0
    cdef double m
    cdef long i, count = 0
    for i in range(num_arms):
        m = s[i] / t[i] if t[i] > 0 else 0.0
        if m > best:
            best = m
            ties[0] = i
            count = 1
        elif m == best:
            ties[count] = i
            count += 1
    return c_pick_tied(ties, count, rng)


cdef long c_argmax_tied(double* values, long n, int64_t* ties, bitgen_t* rng) nogil:
    cdef double best = -INFINITY
    cdef long i, count = 0
    for i in range(n):
        if values[i] > best:
            best = values[i]
            ties[0] = i
            count = 1
        elif values[i] == best:
            ties[count] = i
            count += 1
    return c_pick_tied(ties, count, rng)


def kl_bernoulli(double p, double q):
    """Compiled Bernoulli KL divergence (same contract as the Python one)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    return c_kl_bernoulli(p, q)


def klucb_index(double empirical_mean, pulls, double exploration_budget):
    """Compiled KL-UCB index (same contract as the Python one)."""
    cdef int64_t n = pulls
    if n < 1:
        raise ValueError(f"pulls must be >= 1, got {pulls}")
    if exploration_budget < 0.0:
        raise ValueError(f"exploration_budget must be >= 0, got {exploration_budget}")
    if not 0.0 <= empirical_mean <= 1.0:
        raise ValueError(f"empirical_mean must be in [0, 1], got {empirical_mean}")
    return c_klucb_index(empirical_mean, n, exploration_budget)


def exploration_rate(round_index, double c=3.0):
    """Compiled exploration budget f(t) = log t + c log(max(log t, 1))."""
    if round_index < 1:
        raise ValueError("round_index must be >= 1")
    return c_exploration_rate(<double>round_index, c)


def run_trial_kernel(int policy_id,
                     const int64_t[::1] nplus_indptr,
                     const int64_t[::1] nplus_indices,
                     const double[::1] means,
                     Py_ssize_t horizon,
                     object bit_generator,
                     double klucb_c,
                     int64_t max_degree):
    """Run one trial; returns (cumulative_regret, pulls, leader_count).

    `nplus_indptr`/`nplus_indices` hold the closed neighborhoods of all arms
    in CSR form with ascending arm order inside each row. The caller's
    `bit_generator` is locked for the duration of the loop and advanced
    exactly as the pure-Python trial loop would advance it.
    """
    cdef long num_arms = means.shape[0]
    if num_arms < 1:
        raise ValueError("need at least one arm")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if policy_id < 0 or policy_id > 4:
        raise ValueError(f"unknown policy id {policy_id}")
    if nplus_indptr.shape[0] != num_arms + 1:
        raise ValueError("neighborhood table does not match num_arms")

    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("expected a numpy BitGenerator")
    cdef bitgen_t* rng = <bitgen_t*>PyCapsule_GetPointer(capsule, "BitGenerator")

    reward_sum_arr = np.zeros(num_arms, dtype=np.float64)
    pulls_arr = np.zeros(num_arms, dtype=np.int64)
    leader_count_arr = np.zeros(num_arms, dtype=np.int64)
    cumreg_arr = np.empty(horizon, dtype=np.float64)
    theta_arr = np.empty(num_arms, dtype=np.float64)
    ties_arr = np.empty(num_arms, dtype=np.int64)

    cdef double[::1] s_mv = reward_sum_arr
    cdef int64_t[::1] t_mv = pulls_arr
    cdef int64_t[::1] l_mv = leader_count_arr
    cdef double[::1] cumreg = cumreg_arr
    cdef double[::1] theta_mv = theta_arr
    cdef int64_t[::1] ties_mv = ties_arr

    cdef double* s = &s_mv[0]
    cdef int64_t* t_ = &t_mv[0]
    cdef int64_t* l_ = &l_mv[0]
    cdef double* theta = &theta_mv[0]
    cdef int64_t* ties = &ties_mv[0]

    cdef double mu_star = means[0]
    cdef long i
    for i in range(1, num_arms):
        if means[i] > mu_star:
            mu_star = means[i]

    cdef Py_ssize_t round_
    cdef long arm, leader, lead, start, nsz, k
    cdef double u, budget, bestv, v, creg = 0.0

    with bit_generator.lock:
        with nogil:
            for round_ in range(1, horizon + 1):
                if policy_id == 0:  # unimodal Thompson sampling
                    lead = c_select_leader(s, t_, num_arms, ties, rng)
                    start = <long>nplus_indptr[lead]
                    nsz = <long>nplus_indptr[lead + 1] - start
                    if l_[lead] % nsz == 0:
                        arm = lead
                    else:
                        for k in range(nsz):
                            i = <long>nplus_indices[start + k]
                            theta[k] = random_beta(rng, 1.0 + s[i],
                                                   1.0 + <double>t_[i] - s[i])
                        k = c_argmax_tied(theta, nsz, ties, rng)
                        arm = <long>nplus_indices[start + k]
                    leader = lead
                elif policy_id == 1:  # Thompson sampling
                    for i in range(num_arms):
                        theta[i] = random_beta(rng, 1.0 + s[i],
                                               1.0 + <double>t_[i] - s[i])
                    arm = c_argmax_tied(theta, num_arms, ties, rng)
                    leader = -1
                elif policy_id == 2:  # KL-UCB
                    arm = -1
                    for i in range(num_arms):
                        if t_[i] == 0:
                            arm = i
                            break
                    if arm < 0:
                        budget = c_exploration_rate(<double>round_, klucb_c)
                        bestv = -1.0
                        for i in range(num_arms):
                            v = c_klucb_index(s[i] / <double>t_[i], t_[i], budget)
                            if v > bestv:
                                bestv = v
                                arm = i
                    leader = -1
                elif policy_id == 3:  # OSUB
                    lead = c_select_leader(s, t_, num_arms, ties, rng)
                    if l_[lead] % (max_degree + 1) == 0:
                        arm = lead
                    else:
                        budget = c_exploration_rate(<double>l_[lead], klucb_c)
                        start = <long>nplus_indptr[lead]
                        nsz = <long>nplus_indptr[lead + 1] - start
                        bestv = -1.0
                        arm = lead
                        for k in range(nsz):
                            i = <long>nplus_indices[start + k]
                            if t_[i] == 0:
                                v = 1.0
                            else:
                                v = c_klucb_index(s[i] / <double>t_[i], t_[i], budget)
                            if v > bestv:
                                bestv = v
                                arm = i
                    leader = lead
                else:  # uniform random control
                    u = random_standard_uniform(rng)
                    arm = <long>(u * num_arms)
                    if arm >= num_arms:
                        arm = num_arms - 1
                    leader = -1

                u = random_standard_uniform(rng)
                if u < means[arm]:
                    s[arm] += 1.0
                t_[arm] += 1
                if leader >= 0:
                    l_[leader] += 1
                creg += mu_star - means[arm]
                cumreg[round_ - 1] = creg

    return cumreg_arr, pulls_arr, leader_count_arr
