"""Core infrastructure shared by CMS-Wheat components."""
