# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.
#
# http://www.sphinx-doc.org/en/master/config

# -- Path setup --------------------------------------------------------------

# import os
# import sys
# sys.path.insert(0, os.path.abspath('.'))


# -- Project information -----------------------------------------------------

project = "multitask_link_prediction"
copyright = "2026, The multitask_link_prediction developers"
author = "The multitask_link_prediction developers"

# The short X.Y version
version = ""
# The full version, including alpha/beta/rc tags
release = "0.1.0"


# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.doctest",
    "sphinx.ext.coverage",
    "sphinx.ext.githubpages",
    "sphinx.ext.autosummary",
    "sphinx.ext.mathjax",
    "numpydoc",
]

autosummary_generate = True
numpydoc_show_class_members = False

templates_path = ["_templates"]

source_suffix = ".rst"

master_doc = "index"

language = None

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

pygments_style = None


# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"

htmlhelp_basename = "multitask_link_predictiondoc"


# -- Options for LaTeX output ------------------------------------------------

latex_documents = [
    (
        master_doc,
        "multitask_link_prediction.tex",
        "multitask\\_link\\_prediction Documentation",
        author,
        "manual",
    ),
]


# -- Options for manual page output ------------------------------------------

man_pages = [
    (
        master_doc,
        "mtdea",
        "multitask_link_prediction Documentation",
        [author],
        1,
    )
]
