"""Service package: pydantic models, handlers, FastAPI app."""
