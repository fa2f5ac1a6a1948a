# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stencil kernels (hot inner loops of the Krylov solvers).

Signature-compatible with :mod:`thermoporo.kernels.numpy_backend`; the
package selects whichever variant imports at runtime.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def diffusion_apply_periodic(u, face_coeffs, inv_h2, out):
    if u.ndim == 2:
        _diff_per_2d(u, face_coeffs[0], face_coeffs[1],
                     inv_h2[0], inv_h2[1], out)
    elif u.ndim == 3:
        _diff_per_3d(u, face_coeffs[0], face_coeffs[1], face_coeffs[2],
                     inv_h2[0], inv_h2[1], inv_h2[2], out)
    else:
        raise ValueError("only dim 2 and 3 are supported")
    return out


def diffusion_apply_dirichlet0(u, face_coeffs, inv_h2, out):
    if u.ndim == 2:
        _diff_dir_2d(u, face_coeffs[0], face_coeffs[1],
                     inv_h2[0], inv_h2[1], out)
    elif u.ndim == 3:
        _diff_dir_3d(u, face_coeffs[0], face_coeffs[1], face_coeffs[2],
                     inv_h2[0], inv_h2[1], inv_h2[2], out)
    else:
        raise ValueError("only dim 2 and 3 are supported")
    return out


def helmholtz_masked(u, active, alpha, beta, inv_h2, out):
    if u.ndim == 2:
        _helm_2d(u, active, alpha, beta, inv_h2[0], inv_h2[1], out)
    elif u.ndim == 3:
        _helm_3d(u, active, alpha, beta, inv_h2[0], inv_h2[1], inv_h2[2], out)
    else:
        raise ValueError("only dim 2 and 3 are supported")
    return out


cdef void _diff_per_2d(double[:, ::1] u, double[:, ::1] kfx, double[:, ::1] kfy,
                       double ihx2, double ihy2, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j, ip, im, jp, jm
    for i in range(nx):
        ip = i + 1 if i + 1 < nx else 0
        im = i - 1 if i > 0 else nx - 1
        for j in range(ny):
            jp = j + 1 if j + 1 < ny else 0
            jm = j - 1 if j > 0 else ny - 1
            out[i, j] = (
                ihx2 * (kfx[ip, j] * (u[ip, j] - u[i, j])
                        - kfx[i, j] * (u[i, j] - u[im, j]))
                + ihy2 * (kfy[i, jp] * (u[i, jp] - u[i, j])
                          - kfy[i, j] * (u[i, j] - u[i, jm]))
            )


cdef void _diff_per_3d(double[:, :, ::1] u,
                       double[:, :, ::1] kfx, double[:, :, ::1] kfy,
                       double[:, :, ::1] kfz,
                       double ihx2, double ihy2, double ihz2,
                       double[:, :, ::1] out) noexcept nogil:
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1], nz = u.shape[2]
    cdef Py_ssize_t i, j, k, ip, im, jp, jm, kp, km
    for i in range(nx):
        ip = i + 1 if i + 1 < nx else 0
        im = i - 1 if i > 0 else nx - 1
        for j in range(ny):
            jp = j + 1 if j + 1 < ny else 0
            jm = j - 1 if j > 0 else ny - 1
            for k in range(nz):
                kp = k + 1 if k + 1 < nz else 0
                km = k - 1 if k > 0 else nz - 1
                out[i, j, k] = (
                    ihx2 * (kfx[ip, j, k] * (u[ip, j, k] - u[i, j, k])
                            - kfx[i, j, k] * (u[i, j, k] - u[im, j, k]))
                    + ihy2 * (kfy[i, jp, k] * (u[i, jp, k] - u[i, j, k])
                              - kfy[i, j, k] * (u[i, j, k] - u[i, jm, k]))
                    + ihz2 * (kfz[i, j, kp] * (u[i, j, kp] - u[i, j, k])
                              - kfz[i, j, k] * (u[i, j, k] - u[i, j, km]))
                )


cdef void _diff_dir_2d(double[:, ::1] u, double[:, ::1] kfx, double[:, ::1] kfy,
                       double ihx2, double ihy2, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j
    cdef double fxl, fxu, fyl, fyu
    for i in range(nx):
        for j in range(ny):
            fxl = 2.0 * kfx[0, j] * u[0, j] if i == 0 \
                else kfx[i, j] * (u[i, j] - u[i - 1, j])
            fxu = -2.0 * kfx[nx, j] * u[nx - 1, j] if i == nx - 1 \
                else kfx[i + 1, j] * (u[i + 1, j] - u[i, j])
            fyl = 2.0 * kfy[i, 0] * u[i, 0] if j == 0 \
                else kfy[i, j] * (u[i, j] - u[i, j - 1])
            fyu = -2.0 * kfy[i, ny] * u[i, ny - 1] if j == ny - 1 \
                else kfy[i, j + 1] * (u[i, j + 1] - u[i, j])
            out[i, j] = ihx2 * (fxu - fxl) + ihy2 * (fyu - fyl)


cdef void _diff_dir_3d(double[:, :, ::1] u,
                       double[:, :, ::1] kfx, double[:, :, ::1] kfy,
                       double[:, :, ::1] kfz,
                       double ihx2, double ihy2, double ihz2,
                       double[:, :, ::1] out) noexcept nogil:
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1], nz = u.shape[2]
    cdef Py_ssize_t i, j, k
    cdef double fxl, fxu, fyl, fyu, fzl, fzu
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                fxl = 2.0 * kfx[0, j, k] * u[0, j, k] if i == 0 \
                    else kfx[i, j, k] * (u[i, j, k] - u[i - 1, j, k])
                fxu = -2.0 * kfx[nx, j, k] * u[nx - 1, j, k] if i == nx - 1 \
                    else kfx[i + 1, j, k] * (u[i + 1, j, k] - u[i, j, k])
                fyl = 2.0 * kfy[i, 0, k] * u[i, 0, k] if j == 0 \
                    else kfy[i, j, k] * (u[i, j, k] - u[i, j - 1, k])
                fyu = -2.0 * kfy[i, ny, k] * u[i, ny - 1, k] if j == ny - 1 \
                    else kfy[i, j + 1, k] * (u[i, j + 1, k] - u[i, j, k])
                fzl = 2.0 * kfz[i, j, 0] * u[i, j, 0] if k == 0 \
                    else kfz[i, j, k] * (u[i, j, k] - u[i, j, k - 1])
                fzu = -2.0 * kfz[i, j, nz] * u[i, j, nz - 1] if k == nz - 1 \
                    else kfz[i, j, k + 1] * (u[i, j, k + 1] - u[i, j, k])
                out[i, j, k] = (ihx2 * (fxu - fxl) + ihy2 * (fyu - fyl)
                                + ihz2 * (fzu - fzl))


cdef void _helm_2d(double[:, ::1] u, double[:, ::1] act,
                   double alpha, double beta,
                   double ihx2, double ihy2, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j, ip, im, jp, jm
    cdef double uc
    for i in range(nx):
        ip = i + 1 if i + 1 < nx else 0
        im = i - 1 if i > 0 else nx - 1
        for j in range(ny):
            if act[i, j] == 0.0:
                out[i, j] = 0.0
                continue
            jp = j + 1 if j + 1 < ny else 0
            jm = j - 1 if j > 0 else ny - 1
            uc = u[i, j]
            out[i, j] = alpha * uc - beta * (
                ihx2 * (u[ip, j] * act[ip, j] + u[im, j] * act[im, j] - 2.0 * uc)
                + ihy2 * (u[i, jp] * act[i, jp] + u[i, jm] * act[i, jm] - 2.0 * uc)
            )


cdef void _helm_3d(double[:, :, ::1] u, double[:, :, ::1] act,
                   double alpha, double beta,
                   double ihx2, double ihy2, double ihz2,
                   double[:, :, ::1] out) noexcept nogil:
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1], nz = u.shape[2]
    cdef Py_ssize_t i, j, k, ip, im, jp, jm, kp, km
    cdef double uc
    for i in range(nx):
        ip = i + 1 if i + 1 < nx else 0
        im = i - 1 if i > 0 else nx - 1
        for j in range(ny):
            jp = j + 1 if j + 1 < ny else 0
            jm = j - 1 if j > 0 else ny - 1
            for k in range(nz):
                if act[i, j, k] == 0.0:
                    out[i, j, k] = 0.0
                    continue
                kp = k + 1 if k + 1 < nz else 0
                km = k - 1 if k > 0 else nz - 1
                uc = u[i, j, k]
                out[i, j, k] = alpha * uc - beta * (
                    ihx2 * (u[ip, j, k] * act[ip, j, k]
                            + u[im, j, k] * act[im, j, k] - 2.0 * uc)
                    + ihy2 * (u[i, jp, k] * act[i, jp, k]
                              + u[i, jm, k] * act[i, jm, k] - 2.0 * uc)
                    + ihz2 * (u[i, j, kp] * act[i, j, kp]
                              + u[i, j, km] * act[i, j, km] - 2.0 * uc)
                )
