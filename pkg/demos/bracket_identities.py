"""Gaussian bracket identities behind the Chapman-Enskog transport coefficients.

Prints every identity with its worst componentwise error for the weight
pairs (1, 1), (r², r²) and (e^{-r}, e^{-r}), together with ν, κ and c.

    python3 demos/bracket_identities.py
"""
from viscous_heating.gauss_moments import (EXP_WEIGHT, R2_WEIGHT, UNIT_WEIGHT, format_reports,
                                           verify_appendix)

for w in (UNIT_WEIGHT, R2_WEIGHT, EXP_WEIGHT):
    print(f"== weights alpha = beta = {w.label}")
    print(format_reports(verify_appendix(w, w)))
