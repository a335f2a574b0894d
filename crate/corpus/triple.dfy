method triple(x: int) returns (r: int)
  ensures r == x + x + x
{
  r := 3 * x;
}
