"""
A terminating ladder from a nonlinear bound state
=================================================

For the level-3 bound state the transcendent is w = 2 sqrt(2) eta^2, with eta
built by three Backlund steps from an erfc seed. Raising the ground zero mode
gives four states and then stops, because A^dag annihilates the fourth. A
second zero mode sits directly above that gap and starts an infinite ladder,
so the spectrum is equidistant after all.
"""

import math

import numpy as np

from tdpainleve.ermakov import ConstantFrequency, make_ermakov, solve_linear_basis
from tdpainleve.invariant import (
    build_superpotentials,
    decay_rate,
    generate_sequence,
    gram_matrix,
    make_grid,
    node_count,
    termination_ratio,
    zero_modes,
)
from tdpainleve.painleve4 import nonlinear_bound_solution

erm = make_ermakov(solve_linear_basis(ConstantFrequency(1.0), 0.0, (0.0, 2.0)), 2.0, 1.0)
sol = nonlinear_bound_solution(3, 0.44 / math.sqrt(math.factorial(3)))

xi = np.linspace(-8, 8, 4001)
eta = sol.data["eta"](xi)[0]
print("real zeros of eta:", int(np.count_nonzero(np.diff(np.sign(eta)))))

S = build_superpotentials(sol)
grid = make_grid(erm, S.lam, omega=decay_rate(sol))
modes = zero_modes(S, erm, sol, 0.5, grid)
print("zero modes:", [(m.label, m.Lam) for m in modes])

first = generate_sequence(S, erm, modes[0], 6)
print("from the ground state:", [L for _, L in first])
print("||A^dag phi_3|| / ||phi_3|| = %.1e" % termination_ratio(S, erm, modes[0], 3))

second = generate_sequence(S, erm, modes[-1], 2)
print("from the upper zero mode:", [L for _, L in second])

states = first + second
G = gram_matrix([p for p, _ in states])
print("nodes:", [node_count(p) for p, _ in states])
print("largest overlap between distinct states: %.1e" % np.max(G - np.diag(np.diag(G))))
