typedef struct {
    int nrows;
    int *rowptr;
    int *colidx;
    double *vals;
} csr_t;

void spmv(const csr_t *A, const double *x, double *y)
{
    for (int r = 0; r < A->nrows; r++) {
        double s = 0;
        for (int k = A->rowptr[r]; k < A->rowptr[r + 1]; k++)
            s += A->vals[k] * x[A->colidx[k]];
        y[r] = s;
    }
}

int nnz_in_row(const csr_t *A, int r)
{
    return A->rowptr[r + 1] - A->rowptr[r];
}

double frobenius(const csr_t *A)
{
    double f = 0;
    int nnz = A->rowptr[A->nrows];
    for (int k = 0; k < nnz; k++)
        f += A->vals[k] * A->vals[k];
    return f;
}

void prefix_sum(int *a, int n)
{
    for (int i = 1; i < n; i++)
        a[i] += a[i - 1];
}

int histogram(const int *keys, int n, int *bins, int nbins)
{
    int outside = 0;
    for (int b = 0; b < nbins; b++)
        bins[b] = 0;
    for (int i = 0; i < n; i++) {
        int k = keys[i];
        if (k < 0 || k >= nbins) {
            outside++;
            continue;
        }
        bins[k]++;
    }
    return outside;
}

void transpose(int rows, int cols, const float *in, float *out)
{
    #pragma omp parallel for collapse(2)
    for (int i = 0; i < rows; i++)
        for (int j = 0; j < cols; j++)
            out[j * rows + i] = in[i * cols + j];
}

static inline int clampi(int v, int lo, int hi)
{
    return v < lo ? lo : (v > hi ? hi : v);
}

void blur_row(const unsigned char *src, unsigned char *dst, int w, int radius)
{
    for (int x = 0; x < w; x++) {
        int acc = 0, cnt = 0;
        for (int d = -radius; d <= radius; d++) {
            acc += src[clampi(x + d, 0, w - 1)];
            cnt++;
        }
        dst[x] = (unsigned char)(acc / cnt);
    }
}
