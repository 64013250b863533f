"""lexcite: pipeline and evaluation toolkit for detecting implicit
statutory citations of the French Civil Code in court decisions."""

__version__ = "0.1.0"
