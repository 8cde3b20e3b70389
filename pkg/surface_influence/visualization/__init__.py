from .portrait import PhasePortrait, render_svg

__all__ = ["PhasePortrait", "render_svg"]
