"""updeq: last-iterate solvers and their update-equivalent search agents
for small imperfect-information games."""

__version__ = "0.1.0"
