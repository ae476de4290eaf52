from setuptools import setup, find_packages

setup(
    name="tasepcheck",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "examples*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy",
        "scipy",
        "mpmath",
        "pydantic>=1.10.18,<2",
        "python-dotenv",
    ],
    entry_points={
        "console_scripts": [
            "tasepcheck=tasepcheck.main:main",
        ],
    },
)
