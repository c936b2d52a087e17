#include <stdio.h>

void kernel_01(double *a, double *b, double *c, int n, int m)
{
    int i, j;
    double s = 0.0, t = 0.0, mx = 0.0, off = 1.0, last = 0.0;

    for (i = 0; i < n; i++) { /* neg-001 */
        for (j = 0; j < m; j++) { /* neg-002 */
            c[i * m + j] = a[i] * b[j];
        }
    }

    #pragma omp parallel for simd
    for (int i = 0; i < n; i++) { /* pos-001 */
        a[i] = 2.0 * b[i];
    }

    for (int k = 1; k < n; k++) { /* neg-003 */
        printf("%f\n", a[k]);
    }

    #pragma omp parallel
    for (int i = 0; i < n; i++) { /* uns-001 */
        for (int k = 0; k < m; k++)
            c[k] += a[i];
    }
    c[0] = s + t + mx + last;
}
