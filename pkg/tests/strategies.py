from hypothesis import strategies as st

from laurent_mahler import LaurentPoly


def laurent_polys(nvars=2, max_terms=6, lo=-3, hi=3, coeff=5, nonzero=False):
    exps = st.tuples(*[st.integers(lo, hi)] * nvars)
    coeffs = st.integers(-coeff, coeff).filter(bool)
    terms = st.dictionaries(exps, coeffs, min_size=1 if nonzero else 0, max_size=max_terms)
    return terms.map(lambda t: LaurentPoly(nvars, t))


def torus_points(nvars=2):
    return st.tuples(*[st.floats(-3.1, 3.1)] * nvars)
