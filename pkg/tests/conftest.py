from hypothesis import strategies as st

from infmat.rings import Integers, IntegersMod, Matrix2Mod, PolynomialsZ, _strip

Z = Integers()
Z6 = IntegersMod(6)
Z3 = IntegersMod(3)
P = PolynomialsZ()
M3 = Matrix2Mod(3)

ints = st.integers(-50, 50)
polys = st.lists(st.integers(-6, 6), max_size=5).map(_strip)
m2 = st.tuples(*[st.integers(0, 2)] * 4)


def elements(ring):
    if ring == Z:
        return ints
    if ring == P:
        return polys
    if ring == M3:
        return m2
    return st.integers(0, ring.n - 1)


def poly_at(p, x: int) -> int:
    """Evaluation homomorphism Z[t] -> Z, used as an oracle."""
    return sum(c * x ** k for k, c in enumerate(p))


def mat2(r, p=3):
    """Flat 4-tuple to nested lists."""
    return [[r[0], r[1]], [r[2], r[3]]]


def matmul2(a, b, p=3):
    x, y = mat2(a), mat2(b)
    return tuple(sum(x[i][k] * y[k][j] for k in range(2)) % p for i in range(2) for j in range(2))


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
