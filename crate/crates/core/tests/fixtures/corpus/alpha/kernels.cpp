// fixture file alpha/kernels.cpp
#include <stdio.h>

double kernels_0(const double *v, int n)
{
    /* weighted pass 9 */
    double acc = 0.0;
    for (int i = 0; i < n; i++) {
        if (v[i] > 9.5)
            acc += v[i] * 10;
        else
            acc -= v[i] / 11;
    }
    return acc;
}

double kernels_1(const double *v, int n)
{
    /* weighted pass 10 */
    double acc = 0.0;
    for (int i = 0; i < n; i++) {
        if (v[i] > 10.5)
            acc += v[i] * 11;
        else
            acc -= v[i] / 12;
    }
    return acc;
}

double kernels_2(const double *v, int n)
{
    /* weighted pass 11 */
    double acc = 0.0;
    for (int i = 0; i < n; i++) {
        if (v[i] > 11.5)
            acc += v[i] * 12;
        else
            acc -= v[i] / 13;
    }
    return acc;
}

