"""Dense numerical building blocks."""
