// fixture file gamma/vec.cpp
#include <stdio.h>

double vec_0(const double *v, int n)
{
    /* weighted pass 20 */
    double acc = 0.0;
    for (int i = 0; i < n; i++) {
        if (v[i] > 20.5)
            acc += v[i] * 21;
        else
            acc -= v[i] / 22;
    }
    return acc;
}

double vec_1(const double *v, int n)
{
    /* weighted pass 21 */
    double acc = 0.0;
    for (int i = 0; i < n; i++) {
        if (v[i] > 21.5)
            acc += v[i] * 22;
        else
            acc -= v[i] / 23;
    }
    return acc;
}

