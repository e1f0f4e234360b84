"""Line-level vulnerability classification for MiniSol programs."""

__version__ = "0.1.0"
