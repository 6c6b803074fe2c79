from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

from rhchi import builtins

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

MODEL_NAMES = ["p1", "p2", "p3", "p4", "p1xp1", "curve0", "curve3"]

small_rationals = st.builds(
    Fraction, st.integers(min_value=-6, max_value=6), st.integers(min_value=1, max_value=4)
)


@st.composite
def elements(draw, model, min_degree=0, max_degree=None):
    """A random element of ``model`` with coefficients on its normal-form basis."""
    top = model.dimension if max_degree is None else max_degree
    raw = {}
    for d in range(min_degree, top + 1):
        for m in model.basis(d):
            c = draw(small_rationals)
            if c:
                raw[m] = c
    return model.element(raw)


@st.composite
def sheaves(draw, model):
    from rhchi.charclass import SheafClass

    rank = draw(st.integers(min_value=0, max_value=3))
    chern = tuple(draw(elements(model, i, i)) for i in range(1, model.dimension + 1))
    return SheafClass(rank, chern)


def model_named(name):
    return builtins.model(name)
