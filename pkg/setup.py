# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

"""Sets up the build for volformer."""

from typing import List, Tuple

import setuptools

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()


def generate_datafiles() -> List[Tuple[str, List[str]]]:
    """Generates the data files for set-up

    Returns:
        List[Tuple[str, List[str]]]: The datafiles for setup.
    """

    return [
        (
            "volformer-docs",
            [
                "README.md",
                "docs/FORMATS.md",
                "docs/CONFIG.md",
            ],
        )
    ]


setuptools.setup(
    name="volformer",
    version="0.1.0",
    author="volformer contributors",
    description="Adapts pretrained 2D vision transformers to 3D MR volumes",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Medical Science Apps.",
    ],
    keywords="vision transformer, mri, position embedding, attention rollout, cross-validation",
    package_dir={"": "src/python"},
    packages=setuptools.find_packages("src/python"),
    install_requires=[
        "typing-extensions>=4.4.0",
        "colorama>=0.4.6",
        "pydantic>=2.0",
        "numpy>=1.24",
        "scipy>=1.10",
    ],
    python_requires=">=3.10",
    data_files=generate_datafiles(),
    entry_points={
        "console_scripts": [
            "volformer = volformer.scripts.main:main",
        ],
    },
)
