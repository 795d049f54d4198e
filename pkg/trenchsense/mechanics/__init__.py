"""Notched-film mechanics: closed forms, reference solver and 2D field."""
