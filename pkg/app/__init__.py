"""Initialize the app package"""

__all__ = (
    'main',
    'config',
    'data_models',
    'services',
    'controllers',
    'request_models'
)
