from setuptools import setup, find_packages

setup(
    name="preview-reference-governor",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "examples"]),
    install_requires=[
        "numpy",
        "scipy",
        "pydantic",
        "python-dotenv",
        "pytest",
        "pytest-cov"
    ],
    python_requires=">=3.10",
    author="Your Name",
    author_email="your.email@example.com",
    description="Reference governors with preview for constrained discrete-time linear systems",
    keywords="reference governor, preview, constraints, admissible set, control",
    url="https://github.com/yourusername/preview-reference-governor",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.13",
    ],
)
