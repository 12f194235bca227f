import unittest

import logbook

from seqdisc.exceptions import UnknownFigure
from seqdisc.registry import Registry


class RegistryTest(unittest.TestCase):

    def test_registry_can_register_builders(self):
        def func(resolution):
            return resolution
        r = Registry()
        r.builder(func)
        assert r['func'] is func

    def test_registry_can_register_builders_with_explicit_names(self):
        def func(resolution):
            return resolution
        r = Registry()
        r.builder(func, name='fig0')
        assert r['fig0'] is func

    def test_registry_builder_can_be_used_as_a_decorator(self):
        r = Registry()
        @r.builder
        def func(resolution):
            return resolution
        assert r['func'] is func

    def test_registry_builder_decorator_accepts_explicit_names(self):
        r = Registry()
        @r.builder(name='fig0')
        def func(resolution):
            return resolution
        assert r['fig0'] is func

    def test_calling_registry_dispatches_to_builder(self):
        r = Registry()
        r['double'] = lambda x: x * 2
        assert r('double', 21) == 42

    def test_calling_registry_with_an_unknown_name_fails(self):
        r = Registry()
        r['fig1'] = lambda x: x
        with self.assertRaises(UnknownFigure) as info:
            r('fig99', 3)
        assert 'fig1' in str(info.exception)
        assert r.names() == ['fig1']

    def test_replacing_a_builder_is_logged(self):
        r = Registry()
        r.builder(lambda x: x, name='fig1')
        with logbook.TestHandler() as handler:
            r.builder(lambda x: -x, name='fig1')
        assert handler.has_warning('Replacing builder fig1')
        assert r('fig1', 2) == -2
