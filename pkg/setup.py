import setuptools

setuptools.setup(
    name="shiftlab",
    version="0.1.0",
    description=(
        "Decides non-emptiness, finiteness and periodicity of multidimensional "
        "shifts of finite type"
    ),
    packages=setuptools.find_packages(exclude=("tests*",)),
    python_requires=">=3.9",
    install_requires=[
        "pydantic>2.0",
        "scipy",
        "numpy",
    ],
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
    ],
    entry_points={
        "console_scripts": [
            "shiftlab = shiftlab.cli:main",
        ]
    },
    include_package_data=True,
    package_data={
        "": [
            "fixtures/*.shift",
        ]
    },
)
