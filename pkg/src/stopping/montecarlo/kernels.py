"""numba path kernels.

Every kernel simulates paths ``start <= i < stop`` and writes into the
caller's output arrays at index ``i``.  Path ``i`` draws only from stream
``(seed, i)`` so chunks can run on any number of threads.

Grid kernels optionally apply a Brownian-bridge correction: with step
endpoints ``a`` and ``b`` the chance that the continuous path crossed a
level ``L`` in between is ``exp(-2 (L - a)(L - b) / (sigma^2 dt))``.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

from .rng import next_exponential, next_normal, next_uniform, stream_init

SCHEME_REFLECT_ABS = 0
SCHEME_XI_SIGN = 1

# exp(-2 * 20) is far below double resolution of a uniform
_BRIDGE_CUTOFF = 20.0


@nb.njit(inline="always")
def _bridge_hit(st, gap_a, gap_b, var):
    g = gap_a * gap_b
    if g >= _BRIDGE_CUTOFF * var:
        return False
    return next_uniform(st) < math.exp(-2.0 * g / var)


@nb.njit(cache=True, nogil=True)
def rbm_first_passage(seed, start, stop, mu, sigma, x0, barrier, dt, t_max, scheme, bridge,
                      out_t, out_cens):
    sq = sigma * math.sqrt(dt)
    var = sigma * sigma * dt
    drift = mu * dt
    max_steps = np.int64(math.ceil(t_max / dt))
    for i in range(start, stop):
        st = stream_init(seed, i)
        if x0 >= barrier:
            out_t[i] = 0.0
            out_cens[i] = False
            continue
        xi = x0
        x = x0
        k = np.int64(0)
        hit = False
        while k < max_steps:
            k += 1
            z = next_normal(st)
            if scheme == SCHEME_REFLECT_ABS:
                xn = abs(x + drift + sq * z)
            else:
                sgn = 1.0 if xi > 0 else (-1.0 if xi < 0 else 0.0)
                xi = xi + sgn * drift + sq * z
                xn = abs(xi)
            if xn >= barrier:
                hit = True
                break
            if bridge and _bridge_hit(st, barrier - x, barrier - xn, var):
                hit = True
                break
            x = xn
        out_t[i] = k * dt if hit else t_max
        out_cens[i] = not hit


@nb.njit(nogil=True)
def diffusion_drawdown(seed, start, stop, mu_fn, sigma_fn, delta, left, reflecting, dt, t_max,
                       bridge, out_m, out_cens, out_exit):
    sdt = math.sqrt(dt)
    max_steps = np.int64(math.ceil(t_max / dt))
    for i in range(start, stop):
        st = stream_init(seed, i)
        x = 0.0
        m = 0.0
        k = np.int64(0)
        done = False
        exited = False
        while k < max_steps:
            k += 1
            s = sigma_fn(x)
            xn = x + mu_fn(x) * dt + s * sdt * next_normal(st)
            if xn < left:
                if reflecting:
                    xn = 2.0 * left - xn
                else:
                    exited = True
                    break
            if bridge:
                # maximum of the bridge between x and xn
                d = xn - x
                top = 0.5 * (x + xn + math.sqrt(d * d - 2.0 * s * s * dt * math.log(next_uniform(st))))
            else:
                top = xn
            if top > m:
                m = top
            floor = m - delta
            if xn <= floor:
                done = True
                break
            if bridge and _bridge_hit(st, x - floor, xn - floor, s * s * dt):
                done = True
                break
            x = xn
        out_m[i] = m
        out_cens[i] = not done
        out_exit[i] = exited


@nb.njit(cache=True, nogil=True)
def cpp_drawdown(seed, start, stop, c, lam, jump_mu, delta, t_max, out_m, out_cens):
    """Exact event-driven simulation of ``c t - sum(jumps)``.

    Between jumps the path rises linearly, so the running maximum is reached
    just before a jump and a drawdown can only start at a jump.
    """
    for i in range(start, stop):
        st = stream_init(seed, i)
        t = 0.0
        x = 0.0
        m = 0.0
        done = False
        while True:
            w = next_exponential(st) / lam
            if t + w > t_max:
                x += c * (t_max - t)
                if x > m:
                    m = x
                break
            t += w
            x += c * w
            if x > m:
                m = x
            x -= next_exponential(st) / jump_mu
            if m - x >= delta:
                done = True
                break
        out_m[i] = m
        out_cens[i] = not done


@nb.njit(cache=True, nogil=True)
def cpp_exit(seed, start, stop, c, lam, jump_mu, lower, upper, t_max, out_up, out_t, out_cens):
    """Exit of ``[-lower, upper]`` for the compound Poisson model started at 0."""
    for i in range(start, stop):
        st = stream_init(seed, i)
        t = 0.0
        x = 0.0
        up = False
        done = False
        while True:
            w = next_exponential(st) / lam
            reach = t + (upper - x) / c
            if reach <= t + w:
                if reach <= t_max:
                    up = True
                    done = True
                    t = reach
                break
            if t + w > t_max:
                break
            t += w
            x += c * w - next_exponential(st) / jump_mu
            if x < -lower:
                done = True
                break
        out_up[i] = up
        out_t[i] = t if done else t_max
        out_cens[i] = not done
