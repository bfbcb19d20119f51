from .volume import save_vol, load_vol, save_lat, load_lat, atomic_write
from .images import save_pfm, load_pfm, save_png, tonemap

__all__ = ["save_vol", "load_vol", "save_lat", "load_lat", "atomic_write",
           "save_pfm", "load_pfm", "save_png", "tonemap"]
