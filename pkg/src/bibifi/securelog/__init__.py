"""Append-only gallery log: reference implementation and break judging."""
