"""Hypothesis strategies and term helpers shared across the suite."""

import hypothesis.strategies as st

from lambdalab import App, Lam, Var, free_vars

NAMES = ("x", "y", "z", "w")


def terms(max_leaves: int = 20):
    """Random terms over a tiny name pool; shadowing happens naturally."""
    base = st.sampled_from(NAMES).map(Var)

    def grow(inner):
        lams = st.tuples(st.sampled_from(NAMES), inner).map(
            lambda p: Lam(p[0], p[1])
        )
        apps = st.tuples(inner, inner).map(lambda p: App(p[0], p[1]))
        return lams | apps

    return st.recursive(base, grow, max_leaves=max_leaves)


def close_term(t):
    """Bind every free variable with an outer abstraction."""
    out = t
    for name in sorted(free_vars(t)):
        out = Lam(name, out)
    return out


def closed_terms(max_leaves: int = 20):
    return terms(max_leaves).map(close_term)
