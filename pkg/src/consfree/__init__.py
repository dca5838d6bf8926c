"""A toolkit for simply-typed applicative term rewriting: parsing, syntactic
classification, bounded rewriting, data-normal-form saturation, and compiling
Turing machines to rewriting systems."""

__version__ = "0.1.0"
