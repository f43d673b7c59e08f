import math
import unittest

import numpy as np

from errores import ErrorCondicionamiento, ErrorDominio, ErrorParametro
from espacio_curvas import CurvaForward, MallaMadurez, aplicar_funcional
from svensson import (EstadoSvenssonConsistente, SvenssonPunto, base_svensson, chequeo_corchete_svensson,
                      construir_ell, curvas_corchete_svensson, curvas_prueba_svensson,
                      paso_dinamica_consistente, residuo_base, simular_svensson, svensson_ajustar,
                      svensson_evaluar)

ALPHA = 0.5


class TestFamilia(unittest.TestCase):
    def setUp(self):
        self.malla = MallaMadurez()

    def test_evaluar(self):
        z = SvenssonPunto(0.04, -0.02, 0.01, 0.005, 0.5, 1.2)
        h = svensson_evaluar(z, self.malla)
        self.assertAlmostEqual(h.tasa_corta, 0.02)
        x = 2.0
        esperado = 0.04 - 0.02 * math.exp(-1.0) + 0.01 * x * math.exp(-1.0) + 0.005 * x * math.exp(-2.4)
        self.assertAlmostEqual(float(h.valores[80]), esperado, places=14)

    def test_parametros_invalidos(self):
        with self.assertRaises(ErrorParametro):
            SvenssonPunto(0.04, -0.02, 0.01, 0.005, 0.0, 1.2)
        with self.assertRaises(ErrorParametro):
            SvenssonPunto(float("nan"), -0.02, 0.01, 0.005, 0.5, 1.2)

    def test_ajuste_recupera_parametros(self):
        z = SvenssonPunto(0.04, -0.02, 0.01, 0.005, 0.5, 1.2)
        resultado = svensson_ajustar(svensson_evaluar(z, self.malla))
        self.assertTrue(resultado.convergio)
        self.assertTrue(resultado.identificable)
        self.assertLess(resultado.desajuste_sup, 1e-8)
        self.assertAlmostEqual(resultado.punto.z5, 0.5, places=4)
        self.assertAlmostEqual(resultado.punto.z6, 1.2, places=4)
        self.assertEqual(resultado.a_dict()["warning"], None)

    def test_ajuste_max_evaluaciones(self):
        h = CurvaForward.constante(self.malla, 0.03)
        with self.assertRaises(ErrorParametro):
            svensson_ajustar(h, max_evaluaciones=0)


class TestFuncional(unittest.TestCase):
    def setUp(self):
        self.malla = MallaMadurez()

    def test_delta(self):
        ell = construir_ell(ALPHA, malla=self.malla)
        columnas = base_svensson(ALPHA, self.malla.nodos)
        for j in range(4):
            g = CurvaForward(self.malla, columnas[:, j])
            self.assertAlmostEqual(aplicar_funcional(ell, g), 1.0 if j == 3 else 0.0, delta=1e-10)

    def test_consistente_da_z4(self):
        h = EstadoSvenssonConsistente(ALPHA, 0.03, -0.01, 0.005, 0.002).curva(self.malla)
        self.assertAlmostEqual(aplicar_funcional(construir_ell(ALPHA), h), 0.002, places=10)

    def test_tenores_degenerados(self):
        with self.assertRaises(ErrorCondicionamiento):
            construir_ell(ALPHA, (1.0, 1.0, 3.0, 5.0))
        with self.assertRaises(ErrorCondicionamiento):
            construir_ell(ALPHA, (1.0, 3.0, 5.0))
        with self.assertRaises(ErrorParametro):
            construir_ell(0.0)
        with self.assertRaises(ErrorParametro):
            construir_ell(ALPHA, (1.0, 3.0, 5.0, 12.0), self.malla)

    def test_residuo_base(self):
        consistente = curvas_prueba_svensson(self.malla, ALPHA)[0]
        self.assertLess(residuo_base(consistente, ALPHA), 1e-12)
        otra = svensson_evaluar(SvenssonPunto(0.03, -0.01, 0.01, 0.0, 1.5, 2.0), self.malla)
        self.assertGreater(residuo_base(otra, ALPHA), 1e-6)


class TestDinamica(unittest.TestCase):
    def test_paso_sin_ruido(self):
        estado = EstadoSvenssonConsistente(ALPHA, 0.03, -0.01, 0.005, 0.002)
        nuevo = paso_dinamica_consistente(estado, 0.01, 0.0)
        self.assertEqual(nuevo.Z1, 0.03)
        self.assertAlmostEqual(nuevo.Z3, 0.005 * math.exp(-0.005))
        self.assertAlmostEqual(nuevo.Z4, 0.002 * math.exp(-0.01))
        self.assertAlmostEqual(nuevo.Z2, -0.01 + (0.005 + 0.002 + 0.005) * 0.01)

    def test_paso_con_ruido(self):
        estado = EstadoSvenssonConsistente(ALPHA, 0.03, -0.01, 0.005, 0.002)
        a = paso_dinamica_consistente(estado, 0.01, 0.0)
        b = paso_dinamica_consistente(estado, 0.01, 0.1)
        self.assertAlmostEqual(b.Z2 - a.Z2, math.sqrt(ALPHA * 0.002) * 0.1)
        self.assertEqual(b.Z4, a.Z4)

    def test_estado_invalido(self):
        with self.assertRaises(ErrorParametro):
            EstadoSvenssonConsistente(ALPHA, 0.03, -0.01, 0.005, -0.001)
        with self.assertRaises(ErrorParametro):
            EstadoSvenssonConsistente(0.0, 0.03, -0.01, 0.005, 0.001)

    def test_simulacion(self):
        inicial = EstadoSvenssonConsistente(ALPHA, 0.03, -0.01, 0.005, 0.002)
        a = simular_svensson(inicial, 0.05, 1.0, 4, semilla=3)
        b = simular_svensson(inicial, 0.05, 1.0, 4, semilla=3, trabajadores=2)
        self.assertEqual(a.factores.shape, (4, 21, 4))
        np.testing.assert_array_equal(a.factores, b.factores)
        np.testing.assert_array_equal(a.factores[:, :, 0], 0.03)
        self.assertTrue(np.all(a.factores[:, :, 3] > 0))
        self.assertEqual(a.estado(1, 20).alpha, ALPHA)
        # Los estados siguen en la familia con z5 = alpha, z6 = 2 alpha
        malla = MallaMadurez()
        self.assertLess(residuo_base(a.estado(2, 10).curva(malla), ALPHA), 1e-12)


class TestCorcheteSvensson(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.malla = MallaMadurez()
        cls.curvas = curvas_corchete_svensson(cls.malla, ALPHA)
        cls.ell = construir_ell(ALPHA, malla=cls.malla)
        cls.chequeo = chequeo_corchete_svensson(ALPHA, cls.ell, cls.curvas)

    def test_pasa(self):
        self.assertTrue(self.chequeo.pasa)
        self.assertEqual(len(self.chequeo.reportes), 4)
        self.assertTrue(self.chequeo.a_dict()["passes"])

    def test_residuo_relativo_al_corchete(self):
        self.assertLessEqual(self.chequeo.umbral, 1e-8)
        for reporte in self.chequeo.reportes:
            self.assertLess(reporte.residuo_rel, self.chequeo.umbral)

    def test_corchete_no_nulo(self):
        # Z4 = 0.002, 0.001, 0.003, 0.004 dan coeficientes entre -0.041 y -0.020
        for c in self.chequeo.coeficientes:
            self.assertLess(c, -0.01)

    def test_perturbacion_conserva_l(self):
        for h, z4 in zip(self.curvas, (0.002, 0.001, 0.003, 0.004)):
            self.assertAlmostEqual(aplicar_funcional(self.ell, h), z4, delta=1e-12)
        self.assertGreater(residuo_base(self.curvas[0], ALPHA), 1e-6)

    def test_ell_anula_sigma(self):
        self.assertLess(max(self.chequeo.ell_sigma), 1e-10)

    def test_coeficientes(self):
        self.assertLessEqual(max(self.chequeo.discrepancias), 1e-4)
        self.assertEqual(len(self.chequeo.coeficientes_analiticos), 4)

    def test_curvas_de_la_familia(self):
        # Sobre la familia el corchete es nulo: se mide contra el tamaño de DX.Y y DY.X
        chequeo = chequeo_corchete_svensson(ALPHA, self.ell, curvas_prueba_svensson(self.malla, ALPHA))
        self.assertLess(max(chequeo.residuos_escalados), 1e-10)
        self.assertLess(max(abs(c) for c in chequeo.coeficientes), 1e-6)
        self.assertLessEqual(max(chequeo.discrepancias), 1e-4)

    def test_fuera_del_dominio(self):
        h = svensson_evaluar(SvenssonPunto(0.03, 0.0, 0.0, -0.002, ALPHA, 2 * ALPHA), self.malla)
        with self.assertRaises(ErrorDominio):
            chequeo_corchete_svensson(ALPHA, self.ell, [h])
        with self.assertRaises(ErrorParametro):
            chequeo_corchete_svensson(ALPHA, self.ell, [])


if __name__ == '__main__':
    unittest.main()
