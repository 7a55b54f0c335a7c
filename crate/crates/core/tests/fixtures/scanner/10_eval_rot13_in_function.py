import codecs
from setuptools import setup


def load_settings(payload):
    return eval(codecs.decode(payload, "rot13"))


setup(name="sneaky-eval", version="1.1")
