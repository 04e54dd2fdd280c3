#!/usr/bin/env python3
from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = fh.read().splitlines()

setup(
    name="biharmonic-lab",
    version="0.1.0",
    author="biharmonic-lab developers",
    author_email="example@example.com",
    description="Numerical verification, shooting and stability tests for biharmonic equivariant maps",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests"]),
    py_modules=["main"],
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=[req for req in requirements if req and not req.startswith('#')],
    entry_points={
        "console_scripts": [
            "biharmonic-lab=main:main",
        ],
    },
)
