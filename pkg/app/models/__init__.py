# Pydantic config and report schemas
