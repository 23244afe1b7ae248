"""Boundary value problems on the part of the Sierpinski gasket above a horizontal cut.

Modules:

* ``dyadic``     exponent sequences of the cut depth, shifts, cell addresses
* ``ratios``     the ratio m0(x) and derived multipliers
* ``mesh``       level-k graphs, harmonic extension, energy, brute-force Dirichlet solver
* ``harmonics``  h0, h1, h_w, synthesis from Haar spectra, closed-form energies
* ``flux``       normal derivatives, Dirichlet-to-Neumann map, Gauss-Green
* ``extension``  gluing, traces, extension below the cut, obstruction experiment
* ``greens``     splines and the Green's function of the domain
* ``checks``     verification groups used by the CLI and the tests

The package namespace is kept free of numerical imports so the command line
tool can set thread counts before numpy loads.
"""

__version__ = "0.1.0"
