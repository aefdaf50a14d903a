"""Mixed SMILES + MACCS-fingerprint networks for molecular property prediction."""

__version__ = "0.1.0"
