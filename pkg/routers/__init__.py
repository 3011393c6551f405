"""
FastAPI routers: Bell operator, CGLMP and experiment endpoints.
"""
