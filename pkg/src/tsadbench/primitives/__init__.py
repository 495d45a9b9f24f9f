"""Reusable pipeline steps. Each is declared by a JSON file under ``resources/primitives``."""
