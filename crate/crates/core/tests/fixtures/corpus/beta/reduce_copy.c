// fixture file alpha/src/reduce.c
#include <stdio.h>

double reduce_0(const double *v, int n)
{
    /* weighted pass 4 */
    double acc = 0.0;
    for (int i = 0; i < n; i++) {
        if (v[i] > 4.5)
            acc += v[i] * 5;
        else
            acc -= v[i] / 6;
    }
    return acc;
}

double reduce_1(const double *v, int n)
{
    /* weighted pass 5 */
    double acc = 0.0;
    for (int i = 0; i < n; i++) {
        if (v[i] > 5.5)
            acc += v[i] * 6;
        else
            acc -= v[i] / 7;
    }
    return acc;
}

double reduce_2(const double *v, int n)
{
    /* weighted pass 6 */
    double acc = 0.0;
    for (int i = 0; i < n; i++) {
        if (v[i] > 6.5)
            acc += v[i] * 7;
        else
            acc -= v[i] / 8;
    }
    return acc;
}

