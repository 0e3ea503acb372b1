"""Compiled inner loop for batched physics stepping.

Advances the multibody state by a block of fixed-dt steps with constant
actuator commands (thrust body-frame forces and servo rest positions are
held between control ticks) and a precomputed per-step wind series. The
semantics mirror ``World.step_arrays`` plus ``Vehicle.environment_forces``
exactly; equivalence is covered by tests. Falls back to unavailable when
numba is not installed; callers must then use the array path.
"""

import math

import numpy as np

try:
    from numba import njit

    available = True
except ImportError:  # pragma: no cover - depends on environment
    available = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


GRAVITY = 9.81


@njit(cache=True)
def _quat_rotate(qw, qx, qy, qz, vx, vy, vz):
    tx = 2.0 * (qy * vz - qz * vy)
    ty = 2.0 * (qz * vx - qx * vz)
    tz = 2.0 * (qx * vy - qy * vx)
    return (
        vx + qw * tx + (qy * tz - qz * ty),
        vy + qw * ty + (qz * tx - qx * tz),
        vz + qw * tz + (qx * ty - qy * tx),
    )


@njit(cache=True)
def _quat_rotate_inv(qw, qx, qy, qz, vx, vy, vz):
    return _quat_rotate(qw, -qx, -qy, -qz, vx, vy, vz)


@njit(cache=True)
def _quat_multiply(aw, ax, ay, az, bw, bx, by, bz):
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


@njit(cache=True)
def _euler_xyz(qw, qx, qy, qz):
    m02 = 2.0 * (qx * qz + qy * qw)
    m12 = 2.0 * (qy * qz - qx * qw)
    m22 = 1.0 - 2.0 * (qx * qx + qy * qy)
    m01 = 2.0 * (qx * qy - qz * qw)
    m00 = 1.0 - 2.0 * (qy * qy + qz * qz)
    if m02 > 1.0:
        m02 = 1.0
    elif m02 < -1.0:
        m02 = -1.0
    return (
        math.atan2(-m12, m22),
        math.asin(m02),
        math.atan2(-m01, m00),
    )


@njit(cache=True)
def _dead_zone(x, h):
    if x > h:
        return x - h
    if x < -h:
        return x + h
    return 0.0


@njit(cache=True)
def run_steps(dt, pos, quat, vel, omega, mass, inertia, inv_inertia,
              jp, jc, j_pa, j_ca, j_pq, j_cq,
              k_lin, c_lin, k_rot, c_rot, free_lin, free_rot, rest_rot,
              aero_body, aero_cyl, aero_area, aero_cl0, aero_cd0,
              aero_cd1, aero_stall, aero_kq, aero_offset, aero_quat,
              buoy_body, buoy_force, buoy_center,
              thr_body, thr_force_b, wind):
    """Advance len(wind) physics steps in place; returns steps completed.

    A return value shorter than the wind series means the state went
    non-finite at that step (the caller raises).
    """
    n = pos.shape[0]
    nj = jp.shape[0]
    na = aero_body.shape[0]
    nb = buoy_body.shape[0]
    nt = thr_body.shape[0]
    nsteps = wind.shape[0]

    force = np.zeros((n, 3))
    torque = np.zeros((n, 3))
    omega_w = np.zeros((n, 3))

    for step in range(nsteps):
        for i in range(n):
            force[i, 0] = 0.0
            force[i, 1] = 0.0
            force[i, 2] = -mass[i] * GRAVITY
            torque[i, 0] = 0.0
            torque[i, 1] = 0.0
            torque[i, 2] = 0.0
            ox, oy, oz = _quat_rotate(
                quat[i, 0], quat[i, 1], quat[i, 2], quat[i, 3],
                omega[i, 0], omega[i, 1], omega[i, 2],
            )
            omega_w[i, 0] = ox
            omega_w[i, 1] = oy
            omega_w[i, 2] = oz

        # joint spring-damper wrench pairs about the anchor midpoints
        for j in range(nj):
            p = jp[j]
            c = jc[j]
            pw, px, py, pz = quat[p, 0], quat[p, 1], quat[p, 2], quat[p, 3]
            cw, cx, cy, cz = quat[c, 0], quat[c, 1], quat[c, 2], quat[c, 3]
            jpw, jpx, jpy, jpz = _quat_multiply(
                pw, px, py, pz, j_pq[j, 0], j_pq[j, 1], j_pq[j, 2], j_pq[j, 3]
            )
            jcw, jcx, jcy, jcz = _quat_multiply(
                cw, cx, cy, cz, j_cq[j, 0], j_cq[j, 1], j_cq[j, 2], j_cq[j, 3]
            )
            rpx, rpy, rpz = _quat_rotate(
                pw, px, py, pz, j_pa[j, 0], j_pa[j, 1], j_pa[j, 2]
            )
            rcx, rcy, rcz = _quat_rotate(
                cw, cx, cy, cz, j_ca[j, 0], j_ca[j, 1], j_ca[j, 2]
            )
            apx = pos[p, 0] + rpx
            apy = pos[p, 1] + rpy
            apz = pos[p, 2] + rpz
            acx = pos[c, 0] + rcx
            acy = pos[c, 1] + rcy
            acz = pos[c, 2] + rcz

            djx, djy, djz = _quat_rotate_inv(
                jpw, jpx, jpy, jpz, acx - apx, acy - apy, acz - apz
            )
            vpx = vel[p, 0] + omega_w[p, 1] * rpz - omega_w[p, 2] * rpy
            vpy = vel[p, 1] + omega_w[p, 2] * rpx - omega_w[p, 0] * rpz
            vpz = vel[p, 2] + omega_w[p, 0] * rpy - omega_w[p, 1] * rpx
            vcx = vel[c, 0] + omega_w[c, 1] * rcz - omega_w[c, 2] * rcy
            vcy = vel[c, 1] + omega_w[c, 2] * rcx - omega_w[c, 0] * rcz
            vcz = vel[c, 2] + omega_w[c, 0] * rcy - omega_w[c, 1] * rcx
            dvx, dvy, dvz = _quat_rotate_inv(
                jpw, jpx, jpy, jpz, vcx - vpx, vcy - vpy, vcz - vpz
            )

            fjx = -k_lin[j, 0] * _dead_zone(djx, free_lin[j, 0]) \
                - c_lin[j, 0] * dvx
            fjy = -k_lin[j, 1] * _dead_zone(djy, free_lin[j, 1]) \
                - c_lin[j, 1] * dvy
            fjz = -k_lin[j, 2] * _dead_zone(djz, free_lin[j, 2]) \
                - c_lin[j, 2] * dvz
            fwx, fwy, fwz = _quat_rotate(jpw, jpx, jpy, jpz, fjx, fjy, fjz)

            rw, rx, ry, rz = _quat_multiply(
                jpw, -jpx, -jpy, -jpz, jcw, jcx, jcy, jcz
            )
            ta, tb, tc = _euler_xyz(rw, rx, ry, rz)
            dox, doy, doz = _quat_rotate_inv(
                jpw, jpx, jpy, jpz,
                omega_w[c, 0] - omega_w[p, 0],
                omega_w[c, 1] - omega_w[p, 1],
                omega_w[c, 2] - omega_w[p, 2],
            )
            tjx = -k_rot[j, 0] * _dead_zone(
                ta - rest_rot[j, 0], free_rot[j, 0]) - c_rot[j, 0] * dox
            tjy = -k_rot[j, 1] * _dead_zone(
                tb - rest_rot[j, 1], free_rot[j, 1]) - c_rot[j, 1] * doy
            tjz = -k_rot[j, 2] * _dead_zone(
                tc - rest_rot[j, 2], free_rot[j, 2]) - c_rot[j, 2] * doz
            twx, twy, twz = _quat_rotate(jpw, jpx, jpy, jpz, tjx, tjy, tjz)

            mx = 0.5 * (apx + acx)
            my = 0.5 * (apy + acy)
            mz = 0.5 * (apz + acz)
            # child side
            ax = mx - pos[c, 0]
            ay = my - pos[c, 1]
            az = mz - pos[c, 2]
            force[c, 0] += fwx
            force[c, 1] += fwy
            force[c, 2] += fwz
            torque[c, 0] += ay * fwz - az * fwy + twx
            torque[c, 1] += az * fwx - ax * fwz + twy
            torque[c, 2] += ax * fwy - ay * fwx + twz
            # parent side
            ax = mx - pos[p, 0]
            ay = my - pos[p, 1]
            az = mz - pos[p, 2]
            force[p, 0] -= fwx
            force[p, 1] -= fwy
            force[p, 2] -= fwz
            torque[p, 0] += -(ay * fwz - az * fwy) - twx
            torque[p, 1] += -(az * fwx - ax * fwz) - twy
            torque[p, 2] += -(ax * fwy - ay * fwx) - twz

        # aero primitives
        wx = wind[step, 0]
        wy = wind[step, 1]
        wz = wind[step, 2]
        for a in range(na):
            i = aero_body[a]
            qw, qx, qy, qz = quat[i, 0], quat[i, 1], quat[i, 2], quat[i, 3]
            armx, army, armz = _quat_rotate(
                qw, qx, qy, qz,
                aero_offset[a, 0], aero_offset[a, 1], aero_offset[a, 2],
            )
            vx = vel[i, 0] + omega_w[i, 1] * armz - omega_w[i, 2] * army
            vy = vel[i, 1] + omega_w[i, 2] * armx - omega_w[i, 0] * armz
            vz = vel[i, 2] + omega_w[i, 0] * army - omega_w[i, 1] * armx
            gw, gx, gy, gz = _quat_multiply(
                qw, qx, qy, qz,
                aero_quat[a, 0], aero_quat[a, 1], aero_quat[a, 2],
                aero_quat[a, 3],
            )
            flx, fly, flz = _quat_rotate_inv(
                gw, gx, gy, gz, wx - vx, wy - vy, wz - vz
            )
            if aero_cyl[a]:
                fx = flx
                fz = abs(fly) + abs(flz)
                phi = math.atan2(fly, flz)
            else:
                fx = flx
                fz = flz
                phi = 0.0
            planar_sq = fx * fx + fz * fz
            if planar_sq > 0.0:
                if fx == 0.0:
                    alpha = math.pi / 2 if fz > 0 else -math.pi / 2
                else:
                    alpha = math.atan(fz / fx)
                q_d = aero_kq[a] * planar_sq
                inv_norm = 1.0 / math.sqrt(planar_sq)
                dx = fx * inv_norm
                dz = fz * inv_norm
                aa = abs(alpha)
                if aa <= aero_stall[a]:
                    c_l = aero_cl0[a] * aa / aero_stall[a]
                else:
                    c_l = aero_cl0[a] * (math.pi - 2 * aa) \
                        / (math.pi - 2 * aero_stall[a])
                frac = 2 * aa / math.pi
                c_d = aero_cd0[a] * (1 - frac) + aero_cd1[a] * frac
                s = 0.0 if alpha == 0.0 else (1.0 if alpha > 0 else -1.0)
                lift_mag = q_d * aero_area[a] * c_l
                drag_mag = q_d * aero_area[a] * c_d
                tot_x = lift_mag * (-dz * s) + drag_mag * dx
                tot_z = lift_mag * (dx * s) + drag_mag * dz
                if aero_cyl[a]:
                    fpx = tot_x
                    fpy = math.sin(phi) * tot_z
                    fpz = math.cos(phi) * tot_z
                else:
                    fpx = tot_x
                    fpy = 0.0
                    fpz = tot_z
                fwx, fwy, fwz = _quat_rotate(gw, gx, gy, gz, fpx, fpy, fpz)
                force[i, 0] += fwx
                force[i, 1] += fwy
                force[i, 2] += fwz
                torque[i, 0] += army * fwz - armz * fwy
                torque[i, 1] += armz * fwx - armx * fwz
                torque[i, 2] += armx * fwy - army * fwx

        # buoyancy
        for b in range(nb):
            i = buoy_body[b]
            armx, army, armz = _quat_rotate(
                quat[i, 0], quat[i, 1], quat[i, 2], quat[i, 3],
                buoy_center[b, 0], buoy_center[b, 1], buoy_center[b, 2],
            )
            fz = buoy_force[b]
            force[i, 2] += fz
            torque[i, 0] += army * fz
            torque[i, 1] += -armx * fz

        # thrusters (body-frame force held over the block)
        for t in range(nt):
            i = thr_body[t]
            fwx, fwy, fwz = _quat_rotate(
                quat[i, 0], quat[i, 1], quat[i, 2], quat[i, 3],
                thr_force_b[t, 0], thr_force_b[t, 1], thr_force_b[t, 2],
            )
            force[i, 0] += fwx
            force[i, 1] += fwy
            force[i, 2] += fwz

        # semi-implicit Euler
        finite = True
        for i in range(n):
            inv_m = dt / mass[i]
            vel[i, 0] += inv_m * force[i, 0]
            vel[i, 1] += inv_m * force[i, 1]
            vel[i, 2] += inv_m * force[i, 2]
            pos[i, 0] += dt * vel[i, 0]
            pos[i, 1] += dt * vel[i, 1]
            pos[i, 2] += dt * vel[i, 2]

            qw, qx, qy, qz = quat[i, 0], quat[i, 1], quat[i, 2], quat[i, 3]
            tbx, tby, tbz = _quat_rotate_inv(
                qw, qx, qy, qz, torque[i, 0], torque[i, 1], torque[i, 2]
            )
            ox, oy, oz = omega[i, 0], omega[i, 1], omega[i, 2]
            iox = inertia[i, 0, 0] * ox + inertia[i, 0, 1] * oy \
                + inertia[i, 0, 2] * oz
            ioy = inertia[i, 1, 0] * ox + inertia[i, 1, 1] * oy \
                + inertia[i, 1, 2] * oz
            ioz = inertia[i, 2, 0] * ox + inertia[i, 2, 1] * oy \
                + inertia[i, 2, 2] * oz
            rx = tbx - (oy * ioz - oz * ioy)
            ry = tby - (oz * iox - ox * ioz)
            rz = tbz - (ox * ioy - oy * iox)
            omega[i, 0] += dt * (
                inv_inertia[i, 0, 0] * rx + inv_inertia[i, 0, 1] * ry
                + inv_inertia[i, 0, 2] * rz
            )
            omega[i, 1] += dt * (
                inv_inertia[i, 1, 0] * rx + inv_inertia[i, 1, 1] * ry
                + inv_inertia[i, 1, 2] * rz
            )
            omega[i, 2] += dt * (
                inv_inertia[i, 2, 0] * rx + inv_inertia[i, 2, 1] * ry
                + inv_inertia[i, 2, 2] * rz
            )

            dw, dx_, dy_, dz_ = _quat_multiply(
                qw, qx, qy, qz, 0.0, omega[i, 0], omega[i, 1], omega[i, 2]
            )
            qw += 0.5 * dt * dw
            qx += 0.5 * dt * dx_
            qy += 0.5 * dt * dy_
            qz += 0.5 * dt * dz_
            norm = math.sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
            quat[i, 0] = qw / norm
            quat[i, 1] = qx / norm
            quat[i, 2] = qy / norm
            quat[i, 3] = qz / norm

            if not (
                np.isfinite(vel[i, 0]) and np.isfinite(vel[i, 1])
                and np.isfinite(vel[i, 2]) and np.isfinite(omega[i, 0])
                and np.isfinite(omega[i, 1]) and np.isfinite(omega[i, 2])
            ):
                finite = False
        if not finite:
            return step + 1
    return nsteps
