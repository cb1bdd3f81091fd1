from setuptools import setup, find_packages

requirements = [
    "numpy",
    "scipy",
    "pandas",
    "xarray",
    "msgpack",
    "tqdm",
]

setup(
    name="multitask_link_prediction",
    version="0.1.0",
    packages=find_packages(exclude=["tests"]),
    long_description=open("README.rst").read(),
    install_requires=requirements,
    entry_points={
        "console_scripts": ["mtdea = multitask_link_prediction.cli:main"]
    },
    include_package_data=True,
)
