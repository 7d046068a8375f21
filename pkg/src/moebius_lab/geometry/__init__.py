"""Pointwise differential geometry: fundamental forms, Moebius invariants, normal structure."""
