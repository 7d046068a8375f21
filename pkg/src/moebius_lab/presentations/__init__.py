"""Presentation layer - renders reports for the terminal and for tools."""
from moebius_lab.presentations.base import Presentation
from moebius_lab.presentations.brief import BriefPresentation
from moebius_lab.presentations.comprehensive import ComprehensivePresentation

__all__ = ["Presentation", "BriefPresentation", "ComprehensivePresentation"]
