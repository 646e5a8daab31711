"""
The logarithmic entropy and its Yosida regularization
======================================================

"""

import numpy as np

from helfrich_ch.potential import psi, psi_h, psi_h_prime, psi_prime, resolvent_J, resolvent_log

# resolvent J_h(s) solves r + h psi'(r) = s
for h in (1e-1, 1e-3, 1e-6):
    print(f"h={h:g}  J_h(0.5)={resolvent_J(0.5, h):.10f}  J_h(1+h)={resolvent_J(1 + h, h):.15f}")

# far below zero the resolvent is tiny; log r stays representable
r, log_r = resolvent_log(-10.0, 0.01)
print("J_0.01(-10) =", r, " log r =", log_r)

# psi_h increases to psi from below
s = np.array([0.05, 0.3, 0.9])
for h in (1e-1, 1e-2, 1e-4):
    print(f"h={h:g}  psi - psi_h = {psi(s) - psi_h(s, h)}")

# psi_h' is defined on all of the real line, with Lipschitz constant 1/h
s = np.linspace(-2, 1.3, 7)
print("psi_h'(s), h=1e-3:", np.round(psi_h_prime(s, 1e-3), 4))
print("psi'(0.3) =", psi_prime(0.3), " psi_h'(0.3) =", psi_h_prime(0.3, 1e-6))
