"""p-adic hypergeometric series, Frobenius structures and syntomic regulators
for the family y^N = x(1-x)^(N-1)(1-lambda x)."""

__version__ = "0.1.0"
