import math
import unittest

from validaciones import (validar_entero_minimo, validar_estrictamente_creciente,
                          validar_estrictamente_decreciente, validar_finito, validar_no_negativo,
                          validar_paso_relativo, validar_positivo)


class TestValidaciones(unittest.TestCase):
    def test_validar_finito(self):
        self.assertTrue(validar_finito(0.03))
        self.assertTrue(validar_finito([0.0, 1.0, 2.0]))
        self.assertFalse(validar_finito(math.nan))
        self.assertFalse(validar_finito([1.0, math.inf]))
        self.assertFalse(validar_finito([]))
        self.assertFalse(validar_finito('abc'))

    def test_validar_positivo(self):
        self.assertTrue(validar_positivo('0.5'))
        self.assertTrue(validar_positivo(1e-12))
        self.assertFalse(validar_positivo(0))
        self.assertFalse(validar_positivo(-1))
        self.assertFalse(validar_positivo(math.inf))
        self.assertFalse(validar_positivo(None))

    def test_validar_no_negativo(self):
        self.assertTrue(validar_no_negativo(0))
        self.assertFalse(validar_no_negativo(-1e-9))
        self.assertFalse(validar_no_negativo(math.nan))

    def test_validar_entero_minimo(self):
        self.assertTrue(validar_entero_minimo(3, 3))
        self.assertTrue(validar_entero_minimo(601.0, 3))
        self.assertFalse(validar_entero_minimo(2, 3))
        self.assertFalse(validar_entero_minimo(3.5, 3))
        self.assertFalse(validar_entero_minimo(True, 0))

    def test_validar_paso_relativo(self):
        self.assertTrue(validar_paso_relativo(1e-5))
        self.assertFalse(validar_paso_relativo(0))
        self.assertFalse(validar_paso_relativo(1))

    def test_monotonia(self):
        self.assertTrue(validar_estrictamente_creciente([0.0, 0.5, 1.0]))
        self.assertFalse(validar_estrictamente_creciente([0.0, 0.5, 0.5]))
        self.assertFalse(validar_estrictamente_creciente([0.0]))
        self.assertTrue(validar_estrictamente_decreciente([4e-3, 2e-3, 1e-3]))
        self.assertTrue(validar_estrictamente_decreciente([1e-3]))
        self.assertFalse(validar_estrictamente_decreciente([1e-3, 2e-3]))
        self.assertFalse(validar_estrictamente_decreciente([1e-3, -1e-3]))


if __name__ == '__main__':
    unittest.main()
