from setuptools import setup

setup(
    name="tidy-package",
    version="0.3.1",
    packages=["tidy_package"],
)
