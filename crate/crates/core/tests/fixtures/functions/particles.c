#include <math.h>
#include <omp.h>

#define SOFTENING 1e-9f

typedef struct { float x, y, z, vx, vy, vz; } Body;

void body_force(Body *p, float dt, int n)
{
    #pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; i++) {
        float Fx = 0.0f, Fy = 0.0f, Fz = 0.0f;
        for (int j = 0; j < n; j++) {
            float dx = p[j].x - p[i].x;
            float dy = p[j].y - p[i].y;
            float dz = p[j].z - p[i].z;
            float distSqr = dx * dx + dy * dy + dz * dz + SOFTENING;
            float invDist = 1.0f / sqrtf(distSqr);
            float invDist3 = invDist * invDist * invDist;
            Fx += dx * invDist3;
            Fy += dy * invDist3;
            Fz += dz * invDist3;
        }
        p[i].vx += dt * Fx;
        p[i].vy += dt * Fy;
        p[i].vz += dt * Fz;
    }
}

void integrate(Body *p, float dt, int n)
{
    #pragma omp parallel for
    for (int i = 0; i < n; i++) {
        p[i].x += p[i].vx * dt;
        p[i].y += p[i].vy * dt;
        p[i].z += p[i].vz * dt;
    }
}

float kinetic_energy(const Body *p, int n)
{
    float e = 0.0f;
    int i;
    #pragma omp parallel for reduction(+:e)
    for (i = 0; i < n; i++)
        e += 0.5f * (p[i].vx * p[i].vx + p[i].vy * p[i].vy + p[i].vz * p[i].vz);
    return e;
}

void init_bodies(Body *p, int n, unsigned seed)
{
    unsigned s = seed;
    for (int i = 0; i < n; i++) {
        s = s * 1103515245u + 12345u;
        p[i].x = (float)(s % 1000) / 1000.0f;
        s = s * 1103515245u + 12345u;
        p[i].y = (float)(s % 1000) / 1000.0f;
        p[i].z = 0.5f;
        p[i].vx = p[i].vy = p[i].vz = 0.0f;
    }
}

double pi_estimate(long steps)
{
    double step = 1.0 / (double)steps, sum = 0.0;
    long k;
    #pragma omp parallel for reduction(+:sum) private(k)
    for (k = 0; k < steps; k++) {
        double x = (k + 0.5) * step;
        sum += 4.0 / (1.0 + x * x);
    }
    return step * sum;
}
