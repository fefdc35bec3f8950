# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
import datetime
import os
import pathlib
import re
import setuptools
import subprocess

#: Module holding the version of the package
VERSION_MODULE = pathlib.Path("senate_simulator", "version.py")


def execute(cmd):
    """Executes a command and returns the lines displayed on the standard
    output"""
    process = subprocess.Popen(cmd,
                               shell=True,
                               stdout=subprocess.PIPE,
                               stderr=subprocess.PIPE)
    return process.stdout.read().decode()


def update_meta(path, version):
    """Updating the version number description in conda/meta.yaml."""
    with open(path, "r") as stream:
        lines = stream.readlines()
    pattern = re.compile(r'{% set version = ".*" %}')

    for idx, line in enumerate(lines):
        if pattern.search(line) is not None:
            lines[idx] = '{%% set version = "%s" %%}\n' % version

    with open(path, "w") as stream:
        stream.write("".join(lines))


def update_sphinx_conf(conf, version, year):
    """Update the Sphinx configuration file"""
    with open(conf, "r") as stream:
        lines = stream.readlines()
    pattern = re.compile(r'(\w+)\s+=\s+(.*)')

    for idx, line in enumerate(lines):
        match = pattern.search(line)
        if match is None:
            continue
        if match.group(1) in ("version", "release"):
            lines[idx] = "%s = %r\n" % (match.group(1), version)
        elif match.group(1) == "copyright":
            lines[idx] = "copyright = '(%s, SENATE simulator developers)'\n" % (
                year)

    with open(conf, "w") as stream:
        stream.write("".join(lines))


def _version_from_module():
    pattern = re.compile(r'return "(\d+\.\d+\.\d+)"')
    with open(VERSION_MODULE, "r") as stream:
        for line in stream:
            match = pattern.search(line)
            if match:
                return match.group(1)
    raise AssertionError("The version module is invalid")


def read_version():
    """Returns the software version, refreshing the version module from the
    last GIT tag when the sources are under version control"""
    stdout = execute("git describe --tags --dirty --long --always").strip()
    match = re.search(r'v?([\d\.]+)-(\d+)-g([\w\d]+)(?:-(dirty))?', stdout)

    # Outside of the development environment, or before the first tag, the
    # version module is authoritative.
    if match is None:
        return _version_from_module()
    version, sha1 = match.group(1), match.group(3)

    stdout = execute("git log %s -1 --format=\"%%H %%at\"" % sha1)
    stdout = stdout.strip().split()
    date = datetime.datetime.fromtimestamp(int(stdout[1]),
                                           tz=datetime.timezone.utc)

    meta = pathlib.Path("conda", "meta.yaml")
    if meta.exists():
        update_meta(meta, version)
    update_sphinx_conf(pathlib.Path("docs", "source", "conf.py"), version,
                       date.year)

    with open(VERSION_MODULE, "r") as stream:
        text = stream.read()
    text = re.sub(r'return "\d+\.\d+\.\d+"', 'return "%s"' % version, text)
    text = re.sub(r'return "\d+ \w+ \d+"',
                  'return "%s"' % date.strftime("%d %B %Y"), text)
    with open(VERSION_MODULE, "w") as stream:
        stream.write(text)
    return version


def main():
    """Main function"""
    os.chdir(pathlib.Path(__file__).parent.absolute())

    with open("README.md", "r") as fh:
        long_description = fh.read()

    setuptools.setup(
        name="senate_simulator",
        version=read_version(),
        author="SENATE simulator developers",
        description="Simulate Sybil-resistant senate election and "
        "byzantine agreement in wireless networks",
        long_description=long_description,
        long_description_content_type="text/markdown",
        packages=setuptools.find_packages(exclude=["tests"]),
        classifiers=[
            "Programming Language :: Python :: 3",
            "License :: OSI Approved :: BSD License",
            "Operating System :: OS Independent",
        ],
        entry_points='''
    [console_scripts]
    senate_simulator=senate_simulator.launcher:main
    ''',
        python_requires='>=3.8',
        install_requires=[
            "distributed", "numba", "numpy", "scipy", "tornado", "xarray"
        ],
        extras_require={"test": ["pytest"]},
    )


if __name__ == "__main__":
    main()
