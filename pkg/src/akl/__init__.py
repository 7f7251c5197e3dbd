"""Killing algebras, isometry groups and holonomy of locally homogeneous affine connections on surfaces."""
