import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="cycleflow-sensitivity-tool",
    version="0.1.0",
    description="DC power flow sensitivities (PTDF, LODF) by the node and the cycle-flow method",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(),
    install_requires=[
          'numpy',
          'scipy',
          'networkx',
          'pandas',
          'requests'
    ],
    extras_require={
          'cholmod': ['scikit-sparse'],
    },
    py_modules=["cycleflow_cli", "bench_pipeline", "cfconstants", "logging_utils", "checkpoint_service",
                "thread_safe_writer", "threading_utils"],
    entry_points={
          'console_scripts': ['cycleflow=cycleflow_cli:main'],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
)
