"""Conversational process extraction from text.

Extracts activities, participants, performs and directly-follows relations
from natural-language process descriptions by asking a text-completion
model an incremental series of questions, and scores the result against
gold annotations.
"""

__version__ = "0.1.0"
