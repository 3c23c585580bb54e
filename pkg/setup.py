"""
Setup script for the occbac package.

Metadata lives in pyproject.toml; this file keeps legacy editable installs working.
"""

from pathlib import Path

from setuptools import find_packages, setup

this_directory = Path(__file__).parent
readme = this_directory / "docs" / "README.md"
long_description = readme.read_text(encoding="utf-8") if readme.exists() else ""

setup(
    name="occbac",
    version="0.1.0",
    description="Bayesian occupancy grids with dependent cells: BAC/OR-gate sensor model, exact and range-gated joint posteriors",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests*", "docs*", "examples*", "configs*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pyyaml>=6.0",
        "pydantic>=2.0.0",
        "tqdm>=4.65.0",
        "python-dotenv>=1.0.0",
        "pillow>=9.0.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=4.0.0",
            "black>=23.0.0",
            "flake8>=6.0.0",
            "mypy>=1.0.0",
            "isort>=5.12.0",
            "pre-commit>=3.0.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "occbac=occbac.cli:main",
        ],
    },
    include_package_data=True,
    zip_safe=False,
)
