"""roomaudit: rule-driven accessibility/safety auditing of 3D indoor scenes,
with deterministic scan simulation and detection scoring."""

__version__ = "0.1.0"
