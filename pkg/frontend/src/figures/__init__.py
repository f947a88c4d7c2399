"""Read-only figure renderer for run manifests."""

from .render import FigureSpec, load_spec, render, render_all, rescale_to

__all__ = ["FigureSpec", "load_spec", "render", "render_all", "rescale_to"]
__version__ = "0.1.0"
