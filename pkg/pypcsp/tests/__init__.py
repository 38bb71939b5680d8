from pypcsp.parser import parse

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

P_FIG_TEXT = "a.((b.d [] c.e) |+1/2| (b.f [] c.g))"
Q_FIG_TEXT = "a.((b.d [] c.g) |+1/2| (b.f [] c.e))"
T_FIG_TEXT = "a.((b.d.omega |+1/2| c.e.omega) |~| (b.f.omega |+1/2| c.g.omega))"

P_C_TEXT = "a |+1/2| b"
Q_C_TEXT = "a |~| b"
T_C_TEXT = "a.omega1 [] b.omega2"

Pfig = parse(P_FIG_TEXT)
Qfig = parse(Q_FIG_TEXT)
Tfig = parse(T_FIG_TEXT)

Pc = parse(P_C_TEXT)
Qc = parse(Q_C_TEXT)
Tc = parse(T_C_TEXT)
