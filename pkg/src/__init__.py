"""
biharmonic-lab - biharmonic equivariant maps between rotationally symmetric
model spaces: residual checks, closed-form families, shooting solutions and
second-variation stability tests.
"""

__version__ = '0.1.0'
