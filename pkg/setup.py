import pathlib

from setuptools import find_packages, setup

# The directory containing this file
HERE = pathlib.Path(__file__).parent

# The text of the README file
README = (HERE / "README.md").read_text()

setup(
    name="d2dcell",
    version="0.1.0",
    description="Outage and spectrum reuse of underlay D2D communication in "
    "a disk-shaped cell, analytic and Monte Carlo",
    keywords="D2D underlay stochastic geometry outage interference",
    long_description=README,
    long_description_content_type="text/markdown",
    license="GPL",
    packages=find_packages(exclude=("tests",)),
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "pyyaml",
        "pydantic>=2",
        "tqdm",
    ],
    package_data={"d2dcell": ["presets/*.yaml"]},
    include_package_data=True,
    entry_points={"console_scripts": ["d2dcell=d2dcell.cli:main"]},
)
